"""Exception types shared across the package."""


class SwarmDriftError(Exception):
    """Base class for all package-specific errors."""


class InsufficientKnots(SwarmDriftError):
    """Fewer than four knots were supplied for a cubic spline."""


class InvalidKnots(SwarmDriftError):
    """Knot positions are not strictly increasing or not finite."""


class NonFiniteInput(SwarmDriftError):
    """A value that must be finite is NaN or infinite."""


class OutOfDomain(SwarmDriftError):
    """Evaluation or integration point lies outside the knot domain."""


class NoRefinementNeeded(SwarmDriftError):
    """Requested knot count does not exceed the current one."""


class DomainMismatch(SwarmDriftError):
    """Two splines that must share a domain do not."""


class DegenerateCoefficients(SwarmDriftError):
    """Both acceleration coefficients are zero; the random step collapses."""


class SingularMap(SwarmDriftError):
    """The tangent update hit a zero denominator (measure-zero event)."""


class SingularInverse(SwarmDriftError):
    """The inverse tangent map is undefined for these arguments."""


class NoConvergence(SwarmDriftError):
    """Fixed-point iteration exhausted its iteration budget."""

    def __init__(self, iterations: int, last_residual: float):
        self.iterations = iterations
        self.last_residual = last_residual
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last L2 residual {last_residual:.3e})"
        )


class NoBracket(SwarmDriftError):
    """Drift does not change sign over the requested bracket."""
