"""Exception hierarchy shared by the library, the service and the CLI.

The CLI maps these onto distinct exit codes (usage 2, assertion 3,
capacity 4); the service maps them onto structured HTTP errors.
"""


class TraceLabError(Exception):
    """Base class for all library errors."""


class CapacityError(TraceLabError):
    """A requested computation exceeds a declared cost or size ceiling."""


class InvalidModulusError(TraceLabError):
    """The modulus is not of the required shape (composite, even, ...)."""


class InvalidArgumentError(TraceLabError):
    """Arguments violate an operation precondition (mismatched moduli, ...)."""


class DomainViolationError(TraceLabError):
    """A value lies outside the domain an operation requires.

    Carries the offending point so failures are actionable.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point
