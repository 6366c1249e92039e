"""Coefficient closures for the degenerate near-boundary equation.

The operator is
    (2x - a psi_x + O1) psi_xx + O2 psi_xy + (b + O3) psi_yy
        - (1 + O4) psi_x + O5 psi_y = 0,
with O1..O5 either identically zero (model/linear closures) or the
shock-reflection closure obtained by rewriting the potential-flow equation in
sonic-chart coordinates (a = gamma+1, b = 1/c2).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .reflection import ReflectionConfiguration

__all__ = [
    "CoefficientModel",
    "model_coefficients",
    "linear_coefficients",
    "reflection_coefficients",
    "zeta",
    "o_bound_audit",
]


@dataclass(frozen=True)
class CoefficientModel:
    """Constants (a, b), lower-order evaluators, and their nominal bound N."""

    a: float
    b: float
    N: float
    label: str
    o_terms: Optional[Callable] = None  # (x, y, psi, psi_x, psi_y) -> 5 arrays

    def evaluate(self, x, y, psi, psi_x, psi_y):
        if self.o_terms is None:
            z = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(psi)))
            return (z, z, z, z, z)
        return self.o_terms(x, y, psi, psi_x, psi_y)

    def describe(self) -> dict:
        return {"a": self.a, "b": self.b, "N": self.N, "label": self.label}


def model_coefficients(a: float, b: float) -> CoefficientModel:
    """Leading-term closure with vanishing lower-order terms."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("model closure needs a > 0 and b > 0")
    return CoefficientModel(a=a, b=b, N=0.0, label="model")


def linear_coefficients(b: float) -> CoefficientModel:
    """Linear contrast closure (no gradient nonlinearity): a = 0."""
    if b <= 0.0:
        raise ValueError("linear closure needs b > 0")
    return CoefficientModel(a=0.0, b=b, N=0.0, label="linear")


def reflection_coefficients(config: ReflectionConfiguration, eps: float | None = None) -> CoefficientModel:
    """Shock-reflection closure in the sonic chart of a configuration.

    The nominal bound N assumes the quadratic regime |psi| <= x^2,
    |psi_x| <= x, |psi_y| <= x on x <= eps <= c2/2; converged solves audit the
    measured ratios against it.
    """
    gam = config.gas.gamma
    c2 = config.c2
    if eps is None:
        eps = c2 / 2.0

    def o_terms(x, y, psi, px, py):
        x = np.asarray(x, dtype=float)
        rm = c2 - x
        py2 = py * py
        O1 = -x * x / c2 + (gam + 1.0) / (2.0 * c2) * (2.0 * x - px) * px \
            - (gam - 1.0) / c2 * (psi + 0.5 * py2 / rm**2)
        O2 = -2.0 / (c2 * rm**2) * (px + rm) * py
        O3 = (
            x * (2.0 * c2 - x)
            - (gam - 1.0) * (psi + rm * px + 0.5 * px * px)
            - (gam + 1.0) / (2.0 * rm**2) * py2
        ) / (c2 * rm**2)
        O4 = (x - (gam - 1.0) / c2 * (psi + rm * px + 0.5 * px * px + 0.5 * py2 / rm**2)) / rm
        O5 = -(px + 2.0 * rm) * py / (c2 * rm**3)
        return O1, O2, O3, O4, O5

    N = _nominal_reflection_bound(gam, c2, eps)
    return CoefficientModel(a=gam + 1.0, b=1.0 / c2, N=N, label="reflection", o_terms=o_terms)


def _nominal_reflection_bound(gam, c2, eps):
    # termwise sup of |O1|/x^2 and |Ok|/x under the quadratic-regime envelope
    n1 = (1.0 + 1.5 * (gam + 1.0) + (gam - 1.0) * (1.0 + 2.0 / c2**2)) / c2
    n2 = 8.0 * (eps + c2) / c2**3
    n3 = 4.0 * (2.0 * c2 + (gam - 1.0) * (c2 + 1.5 * eps) + 2.0 * (gam + 1.0) * eps / c2**2) / c2**3
    n4 = (1.0 + (gam - 1.0) * (1.5 * eps + c2 + 2.0 * eps / c2**2) / c2) * 2.0 / c2
    n5 = 8.0 * (eps + 2.0 * c2) / c2**4
    return float(max(n1, n2, n3, n4, n5))


def zeta(s, a: float, beta: float, M: float):
    """Gradient cutoff: identity on the trusted slope window, clamped outside.

    The window (-(1-beta)/a, M + 1/a) is where the ratio W_x/x of admissible
    solutions lives; clamping keeps the frozen diffusion coefficient within
    [beta*x, (2+aM)*x] without altering admissible iterates.
    """
    if a == 0.0:
        return np.asarray(s, dtype=float)
    return np.clip(s, -(1.0 - beta) / a, M + 1.0 / a)


def o_bound_audit(coeffs: CoefficientModel, x, y, psi, psi_x, psi_y, x_floor: float = 0.0) -> dict:
    """Measured sup of |O1|/x^2 and |Ok|/x over nodes with x > x_floor."""
    O = coeffs.evaluate(x, y, psi, psi_x, psi_y)
    x = np.asarray(x, dtype=float)
    mask = x > x_floor
    if not np.any(mask):
        return {"o1_over_x2": 0.0, "ok_over_x": 0.0, "nominal_N": coeffs.N}
    xm = x[mask]
    r1 = float(np.max(np.abs(np.broadcast_to(O[0], x.shape)[mask]) / xm**2))
    rk = float(
        max(
            np.max(np.abs(np.broadcast_to(O[k], x.shape)[mask]) / xm)
            for k in range(1, 5)
        )
    )
    return {"o1_over_x2": r1, "ok_over_x": rk, "nominal_N": coeffs.N}
