"""Reflected-state algebra and the local geometry of the reflection.

Solves for the uniform state behind the straight reflected shock, locates the
sonic circle and the points where it meets the shock and the wedge, and
provides the sonic coordinate chart (x, y) = (c2 - r, theta - theta_w) used by
the near-boundary solver and diagnostics.
"""

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CenterSingularity,
    NoRegularReflection,
    NoSonicIntersection,
    NotSupersonicAtP0,
    OutOfRange,
    VacuumState,
)
from .states import GasParameters, UniformState, incident_shock, sound_speed, state1

__all__ = [
    "WedgeGeometry",
    "ReflectionConfiguration",
    "solve_state2",
    "sonic_circle",
    "locate_points",
    "to_sonic_coords",
    "from_sonic_coords",
    "shock_curve_fhat",
    "shock_curve_slope",
    "shock_chart_table",
    "shock_depth_max",
    "detachment_angle",
]


@dataclass(frozen=True)
class WedgeGeometry:
    """Half-plane flow domain outside the wedge {eta > xi tan(theta_w), xi > 0}."""

    theta_w: float

    def __post_init__(self):
        if not 0.0 < self.theta_w < np.pi / 2:
            raise ValueError(f"theta_w must lie in (0, pi/2), got {self.theta_w}")

    def contains(self, xi, eta) -> bool:
        if xi < 0.0:
            return eta > 0.0
        return eta > xi * np.tan(self.theta_w)


@dataclass(frozen=True)
class ReflectionConfiguration:
    """Converged reflected-state data for one branch of the algebra."""

    gas: GasParameters
    theta_w: float
    u1: float
    xi0: float
    state2: UniformState
    c2: float
    P0: tuple
    P1: tuple
    P4: tuple
    s1_direction: tuple
    branch: str
    supersonic_at_P0: bool

    @property
    def u2(self) -> float:
        return self.state2.u

    @property
    def v2(self) -> float:
        return self.state2.v

    @property
    def rho2(self) -> float:
        return self.state2.rho

    @property
    def center(self):
        return np.array([self.u2, self.v2])

    @property
    def xi1(self) -> float:
        return self.P1[0]

    @property
    def eta1(self) -> float:
        return self.P1[1]

    @property
    def y1(self) -> float:
        """Angular offset of P1 in the sonic chart."""
        return to_sonic_coords(self, self.P1)[1]

    def residuals(self, n_samples: int = 7) -> dict:
        """Normalized mass-flux and potential-continuity residuals on the shock line."""
        st1 = state1(self.gas)
        st2 = self.state2
        tau = np.asarray(self.s1_direction)
        nu = np.array([tau[1], -tau[0]])
        scale = 0.0
        worst_rh = 0.0
        worst_cont = 0.0
        for t in np.linspace(-1.0, 1.0, n_samples):
            p = np.asarray(self.P0) + t * tau
            d1 = np.array([st1.u - p[0], st1.v - p[1]])
            d2 = np.array([st2.u - p[0], st2.v - p[1]])
            rh = st1.rho * (d1 @ nu) - st2.rho * (d2 @ nu)
            scale = max(
                scale,
                st1.rho * (1.0 + np.linalg.norm(d1)) + st2.rho * (1.0 + np.linalg.norm(d2)),
            )
            worst_rh = max(worst_rh, abs(rh))
            cont = st1.phi(*p) - st2.phi(*p)
            worst_cont = max(worst_cont, abs(cont) / max(1.0, abs(st1.phi(*p))))
        return {"rh": worst_rh / scale, "continuity": worst_cont}

    def to_json(self) -> str:
        d = {
            "gamma": self.gas.gamma,
            "rho0": self.gas.rho0,
            "rho1": self.gas.rho1,
            "theta_w": self.theta_w,
            "u1": self.u1,
            "xi0": self.xi0,
            "u2": self.state2.u,
            "v2": self.state2.v,
            "k2": self.state2.k,
            "rho2": self.state2.rho,
            "c2": self.c2,
            "P0_xi": self.P0[0],
            "P0_eta": self.P0[1],
            "P1_xi": self.P1[0],
            "P1_eta": self.P1[1],
            "P4_xi": self.P4[0],
            "P4_eta": self.P4[1],
            "s1_dir_xi": self.s1_direction[0],
            "s1_dir_eta": self.s1_direction[1],
            "branch": self.branch,
            "supersonic_at_P0": self.supersonic_at_P0,
        }
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReflectionConfiguration":
        d = json.loads(text)
        gas = GasParameters(d["gamma"], d["rho0"], d["rho1"])
        st2 = UniformState(d["u2"], d["v2"], d["k2"], d["rho2"])
        return cls(
            gas=gas,
            theta_w=d["theta_w"],
            u1=d["u1"],
            xi0=d["xi0"],
            state2=st2,
            c2=d["c2"],
            P0=(d["P0_xi"], d["P0_eta"]),
            P1=(d["P1_xi"], d["P1_eta"]),
            P4=(d["P4_xi"], d["P4_eta"]),
            s1_direction=(d["s1_dir_xi"], d["s1_dir_eta"]),
            branch=d["branch"],
            supersonic_at_P0=d["supersonic_at_P0"],
        )


def _state2_of_u2(gas, xi0, tanw, u2):
    """Uniform state (2) forced by the wedge slip condition and the shared Bernoulli constant."""
    v2 = u2 * tanw
    k2 = -xi0 * u2 * (1.0 + tanw * tanw)
    bern = k2 + 0.5 * (u2 * u2 + v2 * v2)
    if gas.isothermal:
        rho2 = gas.rho0 * np.exp(-bern)
    else:
        g = gas.gamma
        arg = gas.rho0 ** (g - 1.0) - (g - 1.0) * bern
        if arg <= 0.0:
            return None
        rho2 = arg ** (1.0 / (g - 1.0))
    return UniformState(u=float(u2), v=float(v2), k=float(k2), rho=float(rho2))


def _u_vacuum(gas, xi0, tanw):
    """Largest u2 with a positive Bernoulli argument (inf for isothermal)."""
    if gas.isothermal:
        return 4.0 * xi0
    g = gas.gamma
    s = 1.0 + tanw * tanw
    a = 0.5 * (g - 1.0) * s
    b = -(g - 1.0) * s * xi0
    c = -gas.rho0 ** (g - 1.0)
    return (-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)


def _flux_residual(gas, xi0, u1, tanw, u2):
    """Mass-flux mismatch across the line {phi1 = phi2}, evaluated at P0.

    The line's normal is proportional to (u1-u2, -v2) because both potentials
    share the quadratic part, and the mismatch is constant along the line, so
    one point decides.  Returns None past the vacuum bound.
    """
    st2 = _state2_of_u2(gas, xi0, tanw, u2)
    if st2 is None:
        return None
    v2 = st2.v
    w = np.array([u1 - u2, -v2])
    nw = np.hypot(w[0], w[1])
    if nw == 0.0:
        return None
    P0 = np.array([xi0, xi0 * tanw])
    d1 = np.array([u1 - P0[0], -P0[1]])
    d2 = np.array([st2.u - P0[0], st2.v - P0[1]])
    return (gas.rho1 * (d1 @ w) - st2.rho * (d2 @ w)) / nw


def _bisect_then_newton(f, a, b, fa, fb):
    for _ in range(90):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm is None or fa * fm <= 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    root = 0.5 * (a + b)
    # Newton polish with a relative finite-difference slope
    for _ in range(6):
        h = 1e-7 * max(abs(root), 1e-8)
        fp, fmn = f(root + h), f(root - h)
        if fp is None or fmn is None:
            break
        deriv = (fp - fmn) / (2.0 * h)
        if deriv == 0.0:
            break
        val = f(root)
        if val is None:
            break
        step = val / deriv
        if not np.isfinite(step):
            break
        new = root - step
        if a <= new <= b or abs(new - root) < 0.25 * (b - a):
            root = new
    return root


def solve_state2(gas: GasParameters, theta_w: float, n_scan: int = 1000) -> dict:
    """Both branches of the reflected-state algebra for a wedge angle.

    Scans u2 between 0 and the vacuum bound (linear grid plus a geometric
    tail toward 0 that captures the weak root for near-normal wedges), then
    refines each bracketed root by bisection and Newton.  Branches are
    labeled weak/strong by ascending rho2.
    """
    if not 0.0 < theta_w < np.pi / 2:
        raise ValueError(f"theta_w must lie in (0, pi/2), got {theta_w}")
    tanw = np.tan(theta_w)
    xi0, u1 = incident_shock(gas)
    u_hi = _u_vacuum(gas, xi0, tanw) * (1.0 - 1e-12)

    f = lambda u2: _flux_residual(gas, xi0, u1, tanw, u2)
    grid = np.unique(
        np.concatenate(
            [
                np.linspace(u_hi / n_scan, u_hi, n_scan),
                u_hi * np.logspace(-14, -3, 45),
            ]
        )
    )
    vals = [f(u) for u in grid]
    roots = []
    for i in range(len(grid) - 1):
        va, vb = vals[i], vals[i + 1]
        if va is None or vb is None:
            continue
        if va == 0.0:
            roots.append(grid[i])
        elif va * vb < 0.0:
            roots.append(_bisect_then_newton(f, grid[i], grid[i + 1], va, vb))
    # collapse near-duplicates from the overlapping grids
    dedup = []
    for r in sorted(roots):
        if not dedup or abs(r - dedup[-1]) > 1e-9 * u_hi:
            dedup.append(r)
    if not dedup:
        raise NoRegularReflection(
            f"no reflected-state root for theta_w={np.degrees(theta_w):.4f} deg "
            f"(below the detachment angle for gamma={gas.gamma}, "
            f"rho0={gas.rho0}, rho1={gas.rho1})"
        )

    configs = []
    for u2 in dedup:
        st2 = _state2_of_u2(gas, xi0, tanw, u2)
        configs.append(_build_configuration(gas, theta_w, xi0, u1, st2))
    configs.sort(key=lambda c: c.rho2)
    weak = replace(configs[0], branch="weak")
    strong = replace(configs[-1], branch="strong")
    if not weak.supersonic_at_P0:
        warnings.warn(
            f"weak branch at theta_w={np.degrees(theta_w):.4f} deg is subsonic at P0 "
            f"(margin {np.linalg.norm(np.asarray(weak.P0) - weak.center) - weak.c2:.3e}); "
            "outside the supersonic regular-reflection regime",
            NotSupersonicAtP0,
            stacklevel=2,
        )
    return {"weak": weak, "strong": strong}


def _build_configuration(gas, theta_w, xi0, u1, st2) -> ReflectionConfiguration:
    tanw = np.tan(theta_w)
    c2 = sound_speed(st2.rho, gas)
    P0 = (xi0, xi0 * tanw)
    center = np.array([st2.u, st2.v])
    dphi2_P0 = center - np.asarray(P0)
    supersonic = bool(np.linalg.norm(dphi2_P0) > c2)

    # shock-line direction, oriented from P0 toward the circle center
    w = np.array([u1 - st2.u, -st2.v])
    tau = np.array([w[1], -w[0]])
    tau /= np.linalg.norm(tau)
    if tau @ dphi2_P0 < 0.0:
        tau = -tau

    P1 = _sonic_intersection(P0, tau, center, c2, theta_w)
    P4 = (center[0] + c2 * np.cos(theta_w), center[1] + c2 * np.sin(theta_w))
    return ReflectionConfiguration(
        gas=gas,
        theta_w=theta_w,
        u1=u1,
        xi0=xi0,
        state2=st2,
        c2=c2,
        P0=P0,
        P1=(float(P1[0]), float(P1[1])),
        P4=(float(P4[0]), float(P4[1])),
        s1_direction=(float(tau[0]), float(tau[1])),
        branch="unlabeled",
        supersonic_at_P0=supersonic,
    )


def _sonic_intersection(P0, tau, center, c2, theta_w):
    """Intersection of the shock line with the sonic circle, on the P0 side, above the wedge."""
    pm = np.asarray(P0) - center
    b = pm @ tau
    c = pm @ pm - c2 * c2
    disc = b * b - c
    if disc < 0.0:
        raise NoSonicIntersection(
            f"shock line misses the sonic circle (discriminant {disc:.3e})"
        )
    sq = np.sqrt(disc)
    candidates = [-b - sq, -b + sq]
    for t in candidates:
        if t <= 0.0:
            continue
        p = np.asarray(P0) + t * tau
        theta = np.arctan2(p[1] - center[1], p[0] - center[0])
        if theta - theta_w > 0.0:
            return p
    raise NoSonicIntersection("no intersection of the shock line with the sonic arc above the wedge")


def sonic_circle(config: ReflectionConfiguration):
    """Center (u2, v2) and radius c2."""
    return np.array([config.u2, config.v2]), config.c2


def locate_points(config: ReflectionConfiguration):
    """(P0, P1, P4) recomputed from the configuration fields."""
    center, c2 = sonic_circle(config)
    tau = np.asarray(config.s1_direction)
    P1 = _sonic_intersection(config.P0, tau, center, c2, config.theta_w)
    P4 = (center[0] + c2 * np.cos(config.theta_w), center[1] + c2 * np.sin(config.theta_w))
    return tuple(config.P0), (float(P1[0]), float(P1[1])), (float(P4[0]), float(P4[1]))


def to_sonic_coords(config: ReflectionConfiguration, point):
    """(x, y) = (c2 - r, theta - theta_w) about the sonic center."""
    p = np.asarray(point, dtype=float)
    d = p - config.center
    r = np.hypot(d[0], d[1])
    if r == 0.0:
        raise CenterSingularity("sonic chart undefined at the circle center")
    return float(config.c2 - r), float(np.arctan2(d[1], d[0]) - config.theta_w)


def from_sonic_coords(config: ReflectionConfiguration, xy):
    x, y = float(xy[0]), float(xy[1])
    r = config.c2 - x
    ang = y + config.theta_w
    return (
        float(config.center[0] + r * np.cos(ang)),
        float(config.center[1] + r * np.sin(ang)),
    )


def _chart_params(config):
    center = config.center
    P1 = np.asarray(config.P1)
    tau = np.asarray(config.s1_direction)
    beta0 = (P1 - center) @ tau  # negative: moving along tau decreases r
    if beta0 >= 0.0:
        raise NoSonicIntersection("shock direction does not enter the sonic circle at P1")
    return center, P1, tau, beta0


def shock_depth_max(config: ReflectionConfiguration) -> float:
    """Largest chart depth x reached by the straight shock (at the chord midpoint)."""
    center, P1, tau, beta0 = _chart_params(config)
    return float(config.c2 - np.sqrt(config.c2**2 - beta0**2))


def shock_chart_table(config: ReflectionConfiguration, xs):
    """Chart image of the straight reflected shock: y, dy/dx, d2y/dx2 at depths xs.

    The line is parametrized by arclength t from P1; t(x) is recovered per
    node by a Newton iteration on the strictly monotone depth function.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    center, P1, tau, beta0 = _chart_params(config)
    c2 = config.c2
    xmax = shock_depth_max(config)
    if np.any(xs < -1e-15) or np.any(xs > xmax * (1.0 + 1e-12)):
        raise OutOfRange(
            f"shock-chart depth outside [0, {xmax:.6g}] "
            f"(requested up to {np.max(xs):.6g})"
        )
    t = np.clip(xs * c2 / (-beta0), 0.0, -beta0)
    for _ in range(60):
        r = np.sqrt(c2 * c2 + 2.0 * t * beta0 + t * t)
        fval = (c2 - r) - xs
        dfdt = -(beta0 + t) / r
        step = fval / dfdt
        t = np.clip(t - step, 0.0, -beta0 * (1.0 - 1e-15))
        if np.max(np.abs(step)) < 1e-16 * max(1.0, c2):
            break
    r = np.sqrt(c2 * c2 + 2.0 * t * beta0 + t * t)
    p = P1[None, :] + t[:, None] * tau[None, :]
    d = p - center[None, :]
    theta = np.arctan2(d[:, 1], d[:, 0])
    y = theta - config.theta_w

    drdt = (beta0 + t) / r
    dxdt = -drdt
    cross = d[:, 0] * tau[1] - d[:, 1] * tau[0]
    dthdt = cross / (r * r)
    d2rdt2 = (1.0 - drdt * drdt) / r
    d2xdt2 = -d2rdt2
    d2thdt2 = -2.0 * drdt * dthdt / r
    yp = dthdt / dxdt
    ypp = (d2thdt2 * dxdt - dthdt * d2xdt2) / dxdt**3
    return y, yp, ypp


def shock_curve_fhat(config: ReflectionConfiguration, x, eps: float | None = None):
    """Chart ordinate y of the straight reflected shock at depth x."""
    if eps is not None and np.any(np.asarray(x) > eps * (1.0 + 1e-12)):
        raise OutOfRange(f"depth beyond the configured truncation eps={eps}")
    y, _, _ = shock_chart_table(config, x)
    return float(y[0]) if np.isscalar(x) else y


def shock_curve_slope(config: ReflectionConfiguration, x):
    """dy/dx of the shock image; positive on the regular-reflection branch."""
    _, yp, _ = shock_chart_table(config, x)
    return float(yp[0]) if np.isscalar(x) else yp


def detachment_angle(gas: GasParameters, lo_deg: float = 5.0, hi_deg: float = 89.9, tol_deg: float = 1e-4):
    """Bracket [lo, hi] (radians) for the smallest wedge angle with a reflected-state root.

    Purely empirical bisection on root existence; reported, not asserted
    against any closed form.
    """

    def exists(deg):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NotSupersonicAtP0)
                solve_state2(gas, np.radians(deg), n_scan=400)
            return True
        except (NoRegularReflection, VacuumState):
            return False

    lo, hi = lo_deg, hi_deg
    if exists(lo):
        return np.radians(lo), np.radians(lo)
    if not exists(hi):
        raise NoRegularReflection(f"no root up to {hi_deg} degrees")
    while hi - lo > tol_deg:
        mid = 0.5 * (lo + hi)
        if exists(mid):
            hi = mid
        else:
            lo = mid
    return np.radians(lo), np.radians(hi)
