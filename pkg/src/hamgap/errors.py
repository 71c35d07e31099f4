"""Exception types shared across the package."""


class HamgapError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(HamgapError, ValueError):
    """Operands live in phase spaces of different dimension."""


class NumericsError(HamgapError, ArithmeticError):
    """A computation produced non-finite values where finite ones are required."""


class GridBudgetError(HamgapError, ValueError):
    """A grid request exceeds the configured point budget."""


class ValidationError(HamgapError, ValueError):
    """A model, potential or argument violates a required property."""


class SolverError(HamgapError, RuntimeError):
    """An implicit solve failed; carries the last residual and time stamp."""

    def __init__(self, message, residual=None, t=None):
        super().__init__(message)
        self.residual = residual
        self.t = t


class InfeasibleStepError(SolverError):
    """No velocity with finite information content could be found."""


class UntemperedModelError(HamgapError, ValueError):
    """A dissipation model failed the temperedness check."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(HamgapError, ValueError):
    """Configuration document is malformed; carries a line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
