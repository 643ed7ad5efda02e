"""Exception taxonomy shared across the package."""


class DistrandError(Exception):
    """Base class for all package errors."""


class NotPSDError(DistrandError):
    """An operator required to be positive semi-definite is not."""


class SingularLogError(DistrandError):
    """Logarithm requested of a singular operator without support restriction."""


class DomainError(DistrandError):
    """A scalar argument lies outside its admissible domain."""


class DimensionMismatchError(DistrandError):
    """Operator dimensions are inconsistent with each other or with metadata."""


class SolverFailureError(DistrandError):
    """The conic solver did not return an Optimal status."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidPOVMError(DistrandError):
    """A measurement's effects are not PSD or do not sum to the identity."""


class ViolationDetectedError(DistrandError):
    """A mathematically guaranteed inequality failed beyond tolerance (a bug)."""
