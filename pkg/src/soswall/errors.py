"""Exception types shared across the package."""


class SoswallError(Exception):
    """Base class for all package errors."""


class ParamsInvalid(SoswallError):
    """Model parameters outside their physical domain (J<=0, beta<=0, t outside (0,1))."""


class ParamsOutOfRange(SoswallError):
    """Parameters outside the validity range required by an operation."""


class EnumerationTooLarge(SoswallError):
    """Exact enumeration would exceed the configured state-count guard."""


class CapNotConverged(SoswallError):
    """Height cap increase changed log Z by more than the declared tolerance."""


class IncompatibleSet(SoswallError):
    """A cylinder set fails the pairwise compatibility requirement."""


class NegativeHeight(SoswallError):
    """Reconstruction drove a height below the wall."""


class OrderTooLarge(SoswallError):
    """Requested truncation order exceeds the enumeration guard rail."""


class NonElementaryCylinder(SoswallError):
    """A cylinder exceeds the elementary diameter cutoff where one is required."""


class SiteNotAtZero(SoswallError):
    """Tornado extraction requested at a site not at height zero."""


class Disconnected(SoswallError):
    """Cluster operations require a connected incompatibility graph."""


class TemplateMismatch(SoswallError):
    """A free-energy difference term cannot be attributed to the expected template."""


class RegionTooLarge(SoswallError):
    """Restricted partition function region exceeds the enumeration cap."""


class NotLargeSet(SoswallError):
    """Contour decomposition requires all cylinders to be large for the cutoff."""


class EpsilonRange(SoswallError):
    """Layering-window epsilon must lie in (0, 2)."""


class SpecFileError(SoswallError):
    """A run-spec file is malformed or contains unknown keys."""
