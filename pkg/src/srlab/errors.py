"""Exception taxonomy shared by all srlab modules."""


class SrlabError(Exception):
    """Base class for srlab failures."""


class VacuumState(SrlabError):
    """Bernoulli argument vanished; the density closure is undefined."""


class InvalidShock(SrlabError):
    """Incident-shock data violates entropy admissibility (rho1 <= rho0)."""


class NoRegularReflection(SrlabError):
    """The reflected-state root scan found no sign change for this wedge angle."""


class NoSonicIntersection(SrlabError):
    """The reflected-shock line misses the sonic circle."""


class CenterSingularity(SrlabError):
    """Sonic coordinates requested at the circle center."""


class OutOfRange(SrlabError):
    """Curve or field evaluated outside its parameter range."""


class OutsideDomain(SrlabError):
    """Evaluation point left the admissible ball of the shock-condition functions."""


class NoConvergence(SrlabError):
    """Iteration budget exhausted before the residual target."""

    def __init__(self, iterations, residual, message=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            message
            or f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class EllipticityLoss(SrlabError):
    """Ellipticity floor active on too many nodes at convergence."""

    def __init__(self, fraction, field=None):
        self.fraction = fraction
        self.field = field
        super().__init__(f"ellipticity clamp active on {100 * fraction:.1f}% of nodes")


class ShockConditionDiverged(SrlabError):
    """Pointwise Newton on the shock boundary condition failed."""


class NonpositiveSamples(SrlabError):
    """Power-law fit requested on a window containing nonpositive values."""


class InsufficientResolution(SrlabError):
    """Field lacks the near-boundary columns needed for extrapolation."""


class EmptyInterval(SrlabError):
    """Barrier-recipe admissible interval is empty for the given inputs."""


class NotSupersonicAtP0(UserWarning):
    """Configuration root has state (2) subsonic at the reflection point."""
