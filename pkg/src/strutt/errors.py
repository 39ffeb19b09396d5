"""Exception types shared across the package."""


class StruttError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(StruttError, ValueError):
    """An argument lies outside the domain of the operation (e.g. s > t)."""


class DivergenceError(StruttError, ValueError):
    """A memory integral does not converge for the requested shift."""


class DegenerateShiftError(StruttError, ValueError):
    """A Hill-matrix row prefactor 1/(i*n*theta + gamma)**2 is singular."""


class ComplexityGuardError(StruttError, ValueError):
    """The requested computation is exponentially large."""


class UnsupportedKernelError(StruttError, TypeError):
    """The operation needs a kernel type other than the one supplied."""


class KernelFormatError(StruttError, ValueError):
    """A kernel definition file is malformed."""
