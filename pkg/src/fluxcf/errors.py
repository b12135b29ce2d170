"""Exception hierarchy shared by the solver modules."""


class FluxCFError(Exception):
    """Base class for all errors raised by :mod:`fluxcf`."""


class ConfigurationError(FluxCFError, ValueError):
    """Invalid mesh, case or CLI parameters."""


class DomainError(FluxCFError, ValueError):
    """A special function received a non-finite argument."""


class SchemePolicyError(FluxCFError, ArithmeticError):
    """A stencil was requested in a regime where its formula is ill-defined.

    Raised when the modified inhomogeneous weight is evaluated at a small
    Péclet number with a nonzero velocity-gradient correction, and when the
    integration-by-parts stencils hit a vanishing denominator.
    """


class SolverError(FluxCFError, RuntimeError):
    """Linear solve failed (zero pivot, non-finite result, residual too large)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MetricError(FluxCFError, ValueError):
    """Error metric is undefined (e.g. zero reference norm)."""
