"""Exception hierarchy shared by all modules."""


class SecureCRError(Exception):
    """Base class for every error raised by securecr."""


class DomainError(SecureCRError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(SecureCRError, ValueError):
    """An operation was called with inconsistent or malformed arguments."""


class InfeasibleError(SecureCRError):
    """A scenario violates a structural feasibility condition (e.g. decodability at T2)."""


class PreconditionError(SecureCRError):
    """A distribution does not satisfy the factorization an operation requires."""
