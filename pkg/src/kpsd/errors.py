"""Exception types shared across the package."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or verify its own output."""


class ConvergenceError(NumericalError):
    """Iterative projection hit its sweep cap.

    ``best`` carries the last iterate so callers can still inspect it.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class AmbiguityError(NumericalError):
    """A decision depends on a quantity sitting inside a tolerance band."""

    def __init__(self, message, quantity=None, value=None):
        super().__init__(message)
        self.quantity = quantity
        self.value = value


class ConsistencyError(RuntimeError):
    """An internal identity that must hold by construction was violated."""
