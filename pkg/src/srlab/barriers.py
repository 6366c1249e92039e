"""Closed-form comparison functions, parameter recipes, and sign scans.

Every barrier here is a two-term profile c1*x^p1*(1-y^2) + c2*x^p2*y^2 with
exact derivatives.  The recipes reproduce the constructive parameter choices
of the comparison arguments (quadratic lower bound, growth bound, lower decay
bound); the sign properties are then verified by dense grid scans with local
refinement, which is reported as sampling evidence, not proof.
"""

from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientModel
from .errors import EmptyInterval
from .grids import ScalarField2D

__all__ = [
    "BarrierFunction",
    "subsolution_w",
    "supersolution_v",
    "subsolution_u_minus",
    "general_u",
    "BarrierRecipe",
    "default_C0",
    "default_growth_C",
    "choose_subsolution_params",
    "choose_growth_params",
    "apply_L1",
    "apply_L2",
    "l2_rhs",
    "scan_L1_sign",
    "scan_L2_defect_sign",
    "verify_comparison",
    "ComparisonReport",
]


def _term(c, p, x):
    return c * x**p if c != 0.0 else np.zeros_like(x)


@dataclass(frozen=True)
class BarrierFunction:
    """c1 * x^p1 * (1 - y^2) + c2 * x^p2 * y^2 with exact derivatives."""

    kind: str
    c1: float
    p1: float
    c2: float
    p2: float

    def value(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return _term(self.c1, self.p1, x) * (1.0 - y * y) + _term(self.c2, self.p2, x) * y * y

    def dx(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return (
            _term(self.c1 * self.p1, self.p1 - 1.0, x) * (1.0 - y * y)
            + _term(self.c2 * self.p2, self.p2 - 1.0, x) * y * y
        )

    def dy(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return 2.0 * y * (_term(self.c2, self.p2, x) - _term(self.c1, self.p1, x))

    def dxx(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return (
            _term(self.c1 * self.p1 * (self.p1 - 1.0), self.p1 - 2.0, x) * (1.0 - y * y)
            + _term(self.c2 * self.p2 * (self.p2 - 1.0), self.p2 - 2.0, x) * y * y
        )

    def dxy(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return 2.0 * y * (
            _term(self.c2 * self.p2, self.p2 - 1.0, x) - _term(self.c1 * self.p1, self.p1 - 1.0, x)
        )

    def dyy(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return 2.0 * (_term(self.c2, self.p2, x) - _term(self.c1, self.p1, x))


def subsolution_w(mu: float, k: float) -> BarrierFunction:
    """Quadratic lower barrier mu x^2 (1-y^2) - k x y^2."""
    return BarrierFunction("subsolution_w", mu, 2.0, -k, 1.0)


def supersolution_v(A1: float, B1: float, alpha: float) -> BarrierFunction:
    """Growth barrier A1 x^(2+alpha) (1-y^2) + B1 x^2 y^2 for W above."""
    return BarrierFunction("supersolution_v", A1, 2.0 + alpha, B1, 2.0)


def subsolution_u_minus(L: float, K: float, alpha: float, alpha2: float = 0.0) -> BarrierFunction:
    """Lower decay barrier -L x^(2+alpha)(1-y^2) - K x^(2+alpha2) y^2 for W below."""
    return BarrierFunction("subsolution_u_minus", -L, 2.0 + alpha, -K, 2.0 + alpha2)


def general_u(c1: float, p1: float, c2: float, p2: float) -> BarrierFunction:
    return BarrierFunction("general_u", c1, p1, c2, p2)


# -- operators ----------------------------------------------------------------


def _barrier_jet(fn: BarrierFunction, x, y):
    return fn.value(x, y), fn.dx(x, y), fn.dy(x, y), fn.dxx(x, y), fn.dxy(x, y), fn.dyy(x, y)


def apply_L1(fn: BarrierFunction, coeffs: CoefficientModel, x, y):
    """Degenerate operator on a closed-form barrier, exact derivatives."""
    v, vx, vy, vxx, vxy, vyy = _barrier_jet(fn, x, y)
    O1, O2, O3, O4, O5 = coeffs.evaluate(np.asarray(x, dtype=float), y, v, vx, vy)
    return (
        (2.0 * np.asarray(x, dtype=float) - coeffs.a * vx + O1) * vxx
        + O2 * vxy + (coeffs.b + O3) * vyy - (1.0 + O4) * vx + O5 * vy
    )


def apply_L2(fn: BarrierFunction, coeffs: CoefficientModel, x, y):
    """Companion operator acting on deviation profiles W."""
    v, vx, vy, vxx, vxy, vyy = _barrier_jet(fn, x, y)
    O1, O2, O3, O4, O5 = coeffs.evaluate(np.asarray(x, dtype=float), y, v, vx, vy)
    return (
        (np.asarray(x, dtype=float) + coeffs.a * vx + O1) * vxx
        + O2 * vxy + (coeffs.b + O3) * vyy - (2.0 + O4) * vx + O5 * vy
    )


def l2_rhs(fn: BarrierFunction, coeffs: CoefficientModel, x, y):
    """(O1 - x O4)/a, evaluated on the barrier's own jet."""
    if coeffs.a == 0.0:
        raise ValueError("the deviation operator needs a > 0")
    v, vx, vy, *_ = _barrier_jet(fn, x, y)
    O1, _, _, O4, _ = coeffs.evaluate(np.asarray(x, dtype=float), y, v, vx, vy)
    return (O1 - np.asarray(x, dtype=float) * O4) / coeffs.a


# -- recipes ------------------------------------------------------------------


def default_C0(b: float, N: float) -> float:
    """Termwise bound for the lower-order contributions in the w-sign estimate."""
    extra = N / (8.0 * (b + N)) if N > 0.0 else 0.0
    return 2.0 * b + 8.0 * N + extra


def default_growth_C(b: float, N: float) -> float:
    """Termwise bound for the correction terms in the growth-barrier estimate."""
    return 1.5 * b + 20.0 * N + 1.0


@dataclass(frozen=True)
class BarrierRecipe:
    a: float
    b: float
    N: float
    rhat: float
    sigma_at_r0: float
    C0: float
    C_growth: float
    r0: float
    mu0: float
    A0: float
    k: float
    mu1: float
    alpha1: float
    r1: float
    alpha2: float
    r2: float

    def w_barrier(self) -> BarrierFunction:
        return subsolution_w(self.mu0, self.k)

    def v_barrier(self) -> BarrierFunction:
        A1 = (1.0 - self.mu1) / (2.0 * self.a * self.r1**self.alpha1)
        B1 = (1.0 - self.mu1) / (2.0 * self.a)
        return supersolution_v(A1, B1, self.alpha1)

    def u_minus_barrier(self, beta: float) -> BarrierFunction:
        K = (1.0 - beta) / (2.0 * self.a)
        L = K / self.r2**self.alpha2
        return subsolution_u_minus(L, K, self.alpha2)

    def describe(self) -> dict:
        return {k: getattr(self, k) for k in (
            "a", "b", "N", "rhat", "sigma_at_r0", "C0", "C_growth",
            "r0", "mu0", "A0", "k", "mu1", "alpha1", "r1", "alpha2", "r2")}


def choose_growth_params(a: float, mu1: float, tol: float = 1e-8):
    """Largest alpha with (1+alpha)(1 + (2+alpha)(1-mu1)/2) - 2 <= -mu1/4.

    The left side is increasing in alpha and strictly feasible at alpha = 0,
    so bisection applies.  Returns (alpha1, r1_bound) where
    r1_bound(C, r0) = min((mu1/(4C))^(1/(1-alpha1)), r0).
    """
    if not 0.0 < mu1 <= 0.5:
        raise ValueError(f"mu1 must lie in (0, 1/2], got {mu1}")

    def lhs(al):
        return (1.0 + al) * (1.0 + 0.5 * (2.0 + al) * (1.0 - mu1)) - 2.0

    target = -mu1 / 4.0
    lo, hi = 0.0, 1.0
    if lhs(hi) <= target:
        lo = hi
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if lhs(mid) <= target:
                lo = mid
            else:
                hi = mid
    alpha1 = lo

    def r1_bound(C: float, r0: float) -> float:
        return min((mu1 / (4.0 * C)) ** (1.0 / (1.0 - alpha1)), r0)

    return alpha1, r1_bound


def choose_subsolution_params(
    a: float,
    b: float,
    N: float,
    rhat: float,
    sigma,
    C0: float | None = None,
    beta: float = 0.5,
    max_halvings: int = 60,
) -> BarrierRecipe:
    """Constructive parameters for the quadratic lower barrier and its companions.

    sigma is the measured interior lower bound of the solution past depth r:
    a callable r -> sigma(r), or a number taken as sigma(r0).  The admissible
    window for A0 is guaranteed nonempty by the r0 choice; if a caller-supplied
    C0 breaks it, r0 is halved before giving up.
    """
    if min(a, b, rhat) <= 0.0 or N < 0.0:
        raise ValueError("need a, b, rhat > 0 and N >= 0")
    if C0 is None:
        C0 = default_C0(b, N)
    r0 = min(1.0 / (4.0 * C0), (b + N) / C0, 1.0 / (8.0 * np.sqrt(C0 * (b + N))), rhat / 2.0, 1.0)
    lo = 4.0 * C0 * r0**2
    hi = 1.0 / (8.0 * (b + N))
    halvings = 0
    while lo >= hi and halvings < max_halvings:
        r0 *= 0.5
        lo = 4.0 * C0 * r0**2
        halvings += 1
    if lo >= hi:
        raise EmptyInterval(f"no admissible A0 window: 4*C0*r0^2 = {lo:.3g} >= {hi:.3g}")
    A0 = 0.5 * (lo + hi)
    sig = float(sigma(r0)) if callable(sigma) else float(sigma)
    if sig <= 0.0:
        raise ValueError(f"interior lower bound sigma must be positive, got {sig}")
    mu0 = min(1.0 / (8.0 * a), sig / r0**2)
    k = mu0 * A0
    mu1 = min(2.0 * a * mu0, 0.5)
    Cg = default_growth_C(b, N)
    alpha1, r1_of = choose_growth_params(a, mu1)
    r1 = r1_of(Cg, r0)
    alpha2, r2_of = choose_growth_params(a, min(beta, 0.5))
    r2 = r2_of(Cg, r0)
    return BarrierRecipe(
        a=a, b=b, N=N, rhat=rhat, sigma_at_r0=sig, C0=C0, C_growth=Cg,
        r0=r0, mu0=mu0, A0=A0, k=k, mu1=mu1,
        alpha1=alpha1, r1=r1, alpha2=alpha2, r2=r2,
    )


# -- sign scans ---------------------------------------------------------------


def _scan(valfun, r, n, minimize):
    xs = np.linspace(r / n, r, n)
    ys = np.linspace(-1.0, 1.0, n)
    vals = valfun(xs[:, None], ys[None, :])
    pick = np.argmin(vals) if minimize else np.argmax(vals)
    i, j = np.unravel_index(pick, vals.shape)
    best = float(vals[i, j])
    # local refinement around the detected extremum
    x_lo = max(xs[max(i - 2, 0)], r / (8 * n))
    x_hi = xs[min(i + 2, n - 1)]
    y_lo, y_hi = ys[max(j - 2, 0)], ys[min(j + 2, n - 1)]
    xf = np.linspace(x_lo, x_hi, 96)
    yf = np.linspace(y_lo, y_hi, 96)
    vf = valfun(xf[:, None], yf[None, :])
    refined = float(np.min(vf) if minimize else np.max(vf))
    if (refined < best) == minimize:
        best = refined
    return best, (float(xs[i]), float(ys[j]))


def scan_L1_sign(barrier: BarrierFunction, coeffs: CoefficientModel, r: float, n: int = 512) -> dict:
    """min of L1(barrier) over (0, r] x [-1, 1]; positive means strict subsolution."""
    best, arg = _scan(lambda x, y: apply_L1(barrier, coeffs, x, y), r, n, minimize=True)
    return {"min": best, "argmin": arg, "n": n, "positive": best > 0.0}


def scan_L2_defect_sign(barrier: BarrierFunction, coeffs: CoefficientModel, r: float,
                        n: int = 512, want: str = "negative") -> dict:
    """Extremum of L2(barrier) - rhs over (0, r] x [-1, 1].

    want="negative" checks a supersolution (max < 0), want="positive" a
    subsolution (min > 0).
    """
    fun = lambda x, y: apply_L2(barrier, coeffs, x, y) - l2_rhs(barrier, coeffs, x, y)
    if want == "negative":
        best, arg = _scan(fun, r, n, minimize=False)
        return {"max": best, "argmax": arg, "n": n, "negative": best < 0.0}
    best, arg = _scan(fun, r, n, minimize=True)
    return {"min": best, "argmin": arg, "n": n, "positive": best > 0.0}


# -- discrete comparison ------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    applicable: bool
    boundary_ok: bool
    violations: int
    worst_margin: float
    n_nodes: int
    window: tuple
    violation_nodes: tuple = ()  # first few offending (x, y, margin) triples

    def ok(self) -> bool:
        return self.applicable and self.violations == 0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["violation_nodes"] = [list(v) for v in self.violation_nodes]
        return d


def verify_comparison(
    field: ScalarField2D,
    barrier: BarrierFunction,
    direction: str,
    r: float,
    y0: float = 0.0,
    halfwidth: float = 1.0,
) -> ComparisonReport:
    """Node-wise comparison of field against barrier(x, y - y0) on a window.

    direction="below" asserts barrier <= field, "above" the reverse.  The
    boundary inequality is checked first; when it fails the comparison
    principle does not apply and the report says so.
    """
    if direction not in ("below", "above"):
        raise ValueError("direction must be 'below' or 'above'")
    xs, ys = field.xs, field.ys
    isel = np.where(xs <= r * (1.0 + 1e-12))[0]
    jsel = np.where(np.abs(ys - y0) <= halfwidth * (1.0 + 1e-12))[0]
    if isel.size < 3 or jsel.size < 3:
        return ComparisonReport(False, False, 0, np.nan, 0, (r, y0, halfwidth))
    bx = xs[isel][:, None]
    by = (ys[jsel] - y0)[None, :]
    bvals = barrier.value(bx, by)
    fvals = field.values[np.ix_(isel, jsel)]
    margin = fvals - bvals if direction == "below" else bvals - fvals
    boundary = np.zeros_like(margin, dtype=bool)
    boundary[0, :] = boundary[-1, :] = True
    boundary[:, 0] = boundary[:, -1] = True
    boundary_ok = bool(np.all(margin[boundary] >= -1e-13))
    bad = np.argwhere(margin < -1e-13)
    nodes = tuple(
        (float(xs[isel][i]), float(ys[jsel][j]), float(margin[i, j])) for i, j in bad[:20]
    )
    return ComparisonReport(
        applicable=boundary_ok,
        boundary_ok=boundary_ok,
        violations=int(bad.shape[0]),
        worst_margin=float(np.min(margin)),
        n_nodes=int(margin.size),
        window=(float(xs[isel][-1]), float(y0), float(halfwidth)),
        violation_nodes=nodes,
    )
