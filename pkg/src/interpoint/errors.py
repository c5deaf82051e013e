"""Exception hierarchy shared by all modules."""


class InterpointError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""

    exit_code = 3


class DomainViolation(InterpointError, ValueError):
    exit_code = 2


class DimensionMismatch(InterpointError, ValueError):
    exit_code = 2


class InvalidParameter(InterpointError, ValueError):
    exit_code = 1


class OutOfScale(InterpointError, ValueError):
    exit_code = 2


class InvalidRadius(InterpointError, ValueError):
    exit_code = 1


class UnsupportedFamily(InterpointError, ValueError):
    exit_code = 1


class PreconditionViolation(InterpointError, ValueError):
    exit_code = 2


class DegenerateDenominator(InterpointError, ArithmeticError):
    pass


class InsufficientAcceptance(InterpointError, RuntimeError):
    pass


class InsufficientCoverage(InterpointError, ValueError):
    pass


class DegenerateLadder(InterpointError, ValueError):
    exit_code = 2
