"""Exception hierarchy shared by all modules."""


class BispectralError(Exception):
    pass


class DomainError(BispectralError, ValueError):
    """Division by zero, pole, or an argument outside the allowed domain."""


class ShapeError(BispectralError, ValueError):
    pass


class EvaluationError(BispectralError):
    """An operator coefficient has a pole at the requested index."""

    def __init__(self, message: str, shift: int | None = None):
        super().__init__(message)
        self.shift = shift


class GenericityError(BispectralError):
    """A nondegeneracy condition fails; ``condition`` carries its label."""

    def __init__(self, message: str, condition: str | None = None, n: int | None = None):
        super().__init__(message)
        self.condition = condition
        self.n = n


class DegenerateParameterError(BispectralError, ValueError):
    pass


class NotInAlgebraError(BispectralError, ValueError):
    pass


class OrderBoundExceeded(BispectralError):
    pass


class SliceError(BispectralError, ValueError):
    pass


class NumericalError(BispectralError):
    pass


class InternalError(BispectralError):
    """An exact identity that must hold by construction failed."""
