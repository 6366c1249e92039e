"""Shock-boundary algebra: the combined jump condition and its linearization.

E combines mass flux and potential continuity across the reflected shock into
one scalar function of the solution perturbation; F eliminates the ordinate
using continuity with the upstream potential; Psi rewrites F in the sonic
chart.  The b-hat coefficients are the exact first-order expansion of Psi
along a boundary trace, computed by quadrature of finite-difference partials.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import OutsideDomain, VacuumState
from .reflection import ReflectionConfiguration
from .shocktrace import read_trace_csv, write_trace_csv  # noqa: F401  (re-export)

__all__ = [
    "ShockBoundaryFns",
    "g_function",
    "g_prime",
    "check_g_unique",
    "synthetic_quadratic_trace",
    "largest_valid_eps",
    "write_trace_csv",
    "read_trace_csv",
]

_SIMPSON_POINTS = 33  # composite Simpson on t in [0,1]; integrand is smooth
_FD_STEP = 1e-6  # relative step for the Psi partials


def _simpson_weights(n):
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * (n - 1))


@dataclass
class ShockBoundaryFns:
    """Evaluators for the combined shock condition of one configuration."""

    config: ReflectionConfiguration
    _cache: dict = field(default_factory=dict, repr=False)

    # -- raw state quantities -------------------------------------------------

    def rho_perturbed(self, p1, p2, p3, xi, eta):
        """Density closure at a perturbed state (gradient offset p, potential offset p3)."""
        cfg = self.config
        gas = cfg.gas
        p1, p2, p3, xi, eta = np.broadcast_arrays(
            *map(np.asarray, (p1, p2, p3, xi, eta))
        )
        lin = (xi - cfg.u2) * p1 + (eta - cfg.v2) * p2 - 0.5 * (p1 * p1 + p2 * p2) - p3
        if gas.isothermal:
            return cfg.rho2 * np.exp(lin)
        g = gas.gamma
        arg = cfg.rho2 ** (g - 1.0) + (g - 1.0) * lin
        if np.any(arg <= 0.0):
            raise VacuumState(
                f"perturbed Bernoulli argument nonpositive (min {np.min(arg):.6g})"
            )
        return arg ** (1.0 / (g - 1.0))

    def E(self, p1, p2, p3, xi, eta):
        """Combined mass-flux/continuity condition in physical coordinates."""
        cfg = self.config
        rho1 = cfg.gas.rho1
        u1, u2, v2 = cfg.u1, cfg.u2, cfg.v2
        p1, p2, p3, xi, eta = np.broadcast_arrays(
            *map(np.asarray, (p1, p2, p3, xi, eta))
        )
        rho = self.rho_perturbed(p1, p2, p3, xi, eta)
        term1 = rho1 * ((u1 - xi) * (u1 - u2 - p1) + eta * (v2 + p2))
        term2 = rho * ((u2 - xi + p1) * (u1 - u2 - p1) - (v2 - eta + p2) * (v2 + p2))
        out = term1 - term2
        return float(out) if out.ndim == 0 else out

    def F(self, p1, p2, p3, xi):
        """E with the ordinate eliminated through potential continuity on the shock."""
        cfg = self.config
        eta = ((cfg.u1 - cfg.u2) * (np.asarray(xi) - cfg.xi1) - np.asarray(p3)) / cfg.v2 + cfg.eta1
        return self.E(p1, p2, p3, xi, eta)

    def Psi(self, p1, p2, p3, x, y):
        """F composed with the sonic chart; p1, p2 are the chart-gradient components."""
        cfg = self.config
        p1, p2, p3, x, y = np.broadcast_arrays(*map(np.asarray, (p1, p2, p3, x, y)))
        ang = y + cfg.theta_w
        r = cfg.c2 - x
        cos, sin = np.cos(ang), np.sin(ang)
        q1 = -p1 * cos - p2 * sin / r
        q2 = -p1 * sin + p2 * cos / r
        xi = cfg.u2 + r * cos
        out = self.F(q1, q2, p3, xi)
        return float(out) if np.ndim(out) == 0 else out

    # -- closed forms at P1 ---------------------------------------------------

    def psi_p1_at_P1(self) -> float:
        """Gradient of Psi in its first slot at the origin, explicit form."""
        cfg = self.config
        rho1, rho2, c2 = cfg.gas.rho1, cfg.rho2, cfg.c2
        u1, u2, v2 = cfg.u1, cfg.u2, cfg.v2
        xi1, eta1 = cfg.P1
        return (
            rho1 / c2 * ((u1 - xi1) * (xi1 - u2) - eta1 * (eta1 - v2))
            - rho2 / c2 * ((u2 - xi1) * (xi1 - u2) + (v2 - eta1) * (eta1 - v2))
        )

    def psi_p1_tau_form(self) -> float:
        """Same quantity via the tangential-velocity reduction (rho2-rho1)(Dphi2.tau)^2/c2."""
        cfg = self.config
        tau = np.asarray(cfg.s1_direction)
        dphi2 = np.array([cfg.u2 - cfg.P1[0], cfg.v2 - cfg.P1[1]])
        return (cfg.rho2 - cfg.gas.rho1) / cfg.c2 * float(dphi2 @ tau) ** 2

    # -- admissible ball ------------------------------------------------------

    def in_domain(self, p1, p2, p3, x, y) -> bool:
        """Evaluation point lies within half the vacuum distance along its p-ray.

        The Bernoulli argument is sampled along t*(p1,p2,p3) for t in [0,2];
        the factor 2 implements the half-distance margin.
        """
        cfg = self.config
        ang = float(y) + cfg.theta_w
        r = cfg.c2 - float(x)
        if r <= 0.0:
            return False
        cos, sin = np.cos(ang), np.sin(ang)
        xi = cfg.u2 + r * cos
        eta = cfg.v2 + r * sin
        t = np.linspace(0.0, 2.0, 65)
        q1 = (-p1 * cos - p2 * sin / r) * t
        q2 = (-p1 * sin + p2 * cos / r) * t
        q3 = p3 * t
        lin = (xi - cfg.u2) * q1 + (eta - cfg.v2) * q2 - 0.5 * (q1 * q1 + q2 * q2) - q3
        if cfg.gas.isothermal:
            return True
        g = cfg.gas.gamma
        arg = cfg.rho2 ** (g - 1.0) + (g - 1.0) * lin
        return bool(np.all(arg > 0.0))

    # -- first-order expansion coefficients -----------------------------------

    def _psi_partial(self, k, p1, p2, p3, x, y):
        h = _FD_STEP * np.maximum(1.0, np.abs((p1, p2, p3)[k - 1]))
        args = [np.asarray(p1, dtype=float), np.asarray(p2, dtype=float), np.asarray(p3, dtype=float)]
        hi = [a.copy() for a in args]
        lo = [a.copy() for a in args]
        hi[k - 1] = hi[k - 1] + h
        lo[k - 1] = lo[k - 1] - h
        return (self.Psi(hi[0], hi[1], hi[2], x, y) - self.Psi(lo[0], lo[1], lo[2], x, y)) / (2.0 * h)

    def bhat(self, x, y, psi, psi_x, psi_y):
        """Expansion coefficients (b1, b2, b3) along a boundary trace.

        b_k at each sample is the t-integral over [0,1] of the k-th partial of
        Psi evaluated on the ray t*(psi_x, psi_y, psi); Simpson quadrature,
        partials by central differences.
        """
        x, y, psi, psi_x, psi_y = map(lambda a: np.atleast_1d(np.asarray(a, dtype=float)),
                                      (x, y, psi, psi_x, psi_y))
        for i in range(x.size):
            if not self.in_domain(psi_x[i], psi_y[i], psi[i], x[i], y[i]):
                raise OutsideDomain(
                    f"trace sample {i} (x={x[i]:.6g}) leaves the admissible ball"
                )
        t = np.linspace(0.0, 1.0, _SIMPSON_POINTS)[:, None]
        w = _simpson_weights(_SIMPSON_POINTS)[:, None]
        out = []
        for k in (1, 2, 3):
            vals = self._psi_partial(k, t * psi_x[None, :], t * psi_y[None, :], t * psi[None, :],
                                     np.broadcast_to(x, (t.size, x.size)),
                                     np.broadcast_to(y, (t.size, y.size)))
            out.append(np.sum(w * vals, axis=0))
        return tuple(out)

    def bhat_report(self, x, y, psi, psi_x, psi_y) -> dict:
        b1, b2, b3 = self.bhat(x, y, psi, psi_x, psi_y)
        lam = 0.5 * self.psi_p1_at_P1()
        return {
            "min_b1": float(np.min(b1)),
            "max_abs_b2": float(np.max(np.abs(b2))),
            "max_abs_b3": float(np.max(np.abs(b3))),
            "lambda": lam,
            "b1_ge_lambda": bool(np.min(b1) >= lam),
        }


def g_function(s, gamma):
    """Normalized-flux function whose level set g=1 pins the sonic jump state."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("g is defined for s > 0")
    g = float(gamma)
    if g <= 1.0:
        raise ValueError("g requires gamma > 1")
    out = 2.0 / (g + 1.0) * s ** (g - 1.0) + (g - 1.0) / (g + 1.0) * s**-2
    return float(out) if out.ndim == 0 else out


def g_prime(s, gamma):
    s = np.asarray(s, dtype=float)
    g = float(gamma)
    out = 2.0 * (g - 1.0) / (g + 1.0) * (s ** (g - 2.0) - s**-3)
    return float(out) if out.ndim == 0 else out


def check_g_unique(gamma, n: int = 100_000) -> bool:
    """Confirm on a log grid that g(s) = 1 only at s = 1, with a V-shaped profile."""
    s = np.logspace(-3.0, 3.0, n)
    vals = g_function(s, gamma)
    i1 = int(np.searchsorted(s, 1.0))
    near_one = np.zeros(n, dtype=bool)
    near_one[max(0, i1 - 1) : min(n, i1 + 2)] = True
    if not np.all(vals[~near_one] > 1.0):
        return False
    dv = g_prime(s, gamma)
    if not np.all(dv[s < 1.0 - 1e-4] < 0.0):
        return False
    if not np.all(dv[s > 1.0 + 1e-4] > 0.0):
        return False
    return True


def synthetic_quadratic_trace(config: ReflectionConfiguration, eps: float, n: int = 64):
    """Boundary trace of the model profile x^2/(2(gamma+1)) along the shock image."""
    from .reflection import shock_chart_table

    a = config.gas.gamma + 1.0
    x = np.linspace(eps / n, eps, n)
    y, _, _ = shock_chart_table(config, x)
    psi = x * x / (2.0 * a)
    psi_x = x / a
    psi_y = np.zeros_like(x)
    return x, y, psi, psi_x, psi_y


def largest_valid_eps(config: ReflectionConfiguration, eps_candidates, n: int = 64):
    """Largest sampled truncation for which min b1 >= lambda on the quadratic trace."""
    fns = ShockBoundaryFns(config)
    best = None
    for eps in sorted(eps_candidates):
        try:
            rep = fns.bhat_report(*synthetic_quadratic_trace(config, eps, n))
        except (OutsideDomain, VacuumState):
            break
        if rep["b1_ge_lambda"]:
            best = eps
        else:
            break
    return best
