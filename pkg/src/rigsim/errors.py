"""Exception hierarchy shared by every rigsim module."""


class RigError(Exception):
    """Base class for all library errors."""


class ProfileRangeError(RigError, ValueError):
    """An attachment probability lies outside the open interval (0, 1)."""


class SizeError(RigError, ValueError):
    pass


class RangeError(RigError, ValueError):
    pass


class DomainError(RigError, ValueError):
    pass


class StateError(RigError, RuntimeError):
    pass


class WorkBudgetError(RigError, RuntimeError):
    """Construction would exceed the configured pair-work budget."""


class EnumerationBudgetError(RigError, ValueError):
    pass


class InputError(RigError, ValueError):
    pass


class TraceError(RigError, AssertionError):
    """An exploration trace violates one of its bookkeeping identities."""
