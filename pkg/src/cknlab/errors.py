"""Exception hierarchy shared by all modules."""


class CknError(Exception):
    """Base class for every error raised by cknlab."""


class ValidationError(CknError, ValueError):
    """Inputs violate a documented precondition."""


class DomainError(ValidationError):
    pass


class InvalidWeightError(ValidationError):
    pass


class UnsupportedError(ValidationError):
    pass


class UndefinedConstantError(ValidationError):
    pass


class NumericError(CknError, ArithmeticError):
    """A quadrature, inversion or optimisation step broke down."""


class InconsistentClassError(NumericError):
    pass


class ConstructionError(NumericError):
    """A builder could not satisfy its own post-conditions."""


class InconclusiveError(CknError):
    """A heuristic could not reach a verdict.

    ``partials`` carries whatever evidence was gathered.
    """

    def __init__(self, message, partials=None):
        super().__init__(message)
        self.partials = list(partials) if partials is not None else []


class ConstructionImpossible(CknError):
    """The degenerate-case construction does not apply to this weight."""


class InsufficientResolutionError(ValidationError):
    """A grid is too coarse for the requested diagnostic."""


class InadmissibleExponentError(ValidationError):
    """An exponent lies outside the window a construction needs."""
