"""Exception types shared across the package."""


class InvalidAxisError(ValueError):
    """A Bloch axis that is not a unit vector."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or broke an invariant."""


class BoundViolationError(NumericalError):
    """A quantum speed limit inequality was violated beyond tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CircuitFormatError(ValueError):
    """A circuit document does not match the expected schema."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
