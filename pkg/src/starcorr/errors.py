"""Exception hierarchy shared by the library and the command-line front end."""


class StarcorrError(Exception):
    """Base class for every error raised by starcorr."""

    exit_code = 1


class ValidationError(StarcorrError, ValueError):
    """Malformed input or a broken type invariant."""

    exit_code = 2


class CapacityError(ValidationError):
    """Input exceeds an enumeration limit."""


class PreconditionError(ValidationError):
    """Operation called on an input that does not meet its precondition."""


class NumericFailure(StarcorrError, ArithmeticError):
    """A tolerance check failed inside a computation."""

    exit_code = 3
