"""Exception types raised by the library."""


class InvalidArgumentError(ValueError):
    """An input violates a documented precondition."""


class DegenerateRegimeError(ArithmeticError):
    """A closed form is singular for the requested parameters (e.g. r ~ 0)."""


class TruncationError(RuntimeError):
    """Fock-space truncation discards too much probability."""

    def __init__(self, message, deficit):
        super().__init__(message)
        self.deficit = deficit


class EstimationError(RuntimeError):
    """Maximum-likelihood estimation failed or is ill-posed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalError(RuntimeError):
    """An internal numerical invariant was violated."""
