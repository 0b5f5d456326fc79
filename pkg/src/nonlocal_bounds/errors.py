"""Exception hierarchy shared by every module of the package."""


class NonlocalBoundsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidObservable(NonlocalBoundsError):
    """An observable does not square to the identity."""


class DimensionMismatch(NonlocalBoundsError, ValueError):
    pass


class NotHermitian(NonlocalBoundsError, ValueError):
    pass


class InvalidState(NonlocalBoundsError, ValueError):
    """A matrix is not a valid (possibly subnormalized) density matrix."""


class ConvergenceFailure(NonlocalBoundsError, RuntimeError):
    pass


class NormalizationError(NonlocalBoundsError, ValueError):
    """tr(rho + sigma) differs from one."""


class SupportViolation(NonlocalBoundsError, ValueError):
    """rho - sigma has weight outside the support of rho + sigma."""


class WeightConstraintViolation(NonlocalBoundsError, ValueError):
    """u00*u01 != u10*u11."""


class DomainError(NonlocalBoundsError, ValueError):
    pass


class DegenerateMarginals(NonlocalBoundsError, ValueError):
    pass


class NonRealSymmetric(NonlocalBoundsError, ValueError):
    """A sigma_2 component survived in a local Bloch decomposition."""


class DegenerateAngles(NonlocalBoundsError, ValueError):
    pass


class DegenerateDifference(NonlocalBoundsError, ValueError):
    pass


class NonDistribution(NonlocalBoundsError, ValueError):
    pass
