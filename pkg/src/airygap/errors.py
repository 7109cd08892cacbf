"""Exception hierarchy for airygap.

Every error raised on purpose by the library derives from :class:`AirygapError`,
so callers (the CLI in particular) can separate bad input from numerical
breakdown.
"""


class AirygapError(Exception):
    """Base class for library errors."""


class DomainError(AirygapError, ValueError):
    """An argument lies outside the domain of the operation."""


class InadmissibleConfigError(DomainError):
    """The interval configuration lies outside the admissible set."""


class DegenerateConfigurationError(DomainError):
    """Endpoints (nearly) coincide, so the Riemann surface degenerates."""


class NumericalError(AirygapError, ArithmeticError):
    """A numerical stage failed or lost too much accuracy."""


class QuadratureError(NumericalError):
    pass


class NoSolutionError(NumericalError):
    """The outer root-find found no sign change of the x0 residual."""


class AmbiguousSolutionError(NumericalError):
    """Several admissible x0 were found (raised only in strict mode)."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class InconsistentHomologyError(NumericalError):
    """Period matrix failed the symmetry / positivity checks."""


class SolverInconsistencyError(NumericalError):
    """A derived quantity violates a sign constraint it must satisfy."""


class NearSingularError(NumericalError):
    """I - K is numerically singular (an eigenvalue of K reached 1)."""


class ThetaEvaluationError(NumericalError):
    pass


class InsufficientDataError(DomainError):
    pass


class AliasingError(DomainError):
    """The r-grid is too coarse to resolve the theta oscillation."""


class UnsupportedOrderError(DomainError):
    pass
