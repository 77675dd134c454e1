"""Exception classes shared across the package."""


class EpgravError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDamping(EpgravError):
    """eta1 == eta2: the EP drive amplitude diverges, no finite EP exists."""


class AmbiguousTracking(EpgravError):
    """Branch matching costs tie away from any branch point."""


class OutOfRange(EpgravError):
    """Argument outside the supported parameter range."""


class Blowup(EpgravError):
    """Integration amplitude exceeded the overflow guard."""


class StiffnessFailure(EpgravError):
    """Adaptive step size underflowed; the problem looks stiff."""


class NoLock(EpgravError):
    """No single dominant spectral peak; the motion is not frequency locked."""


class FitFailure(EpgravError):
    """Exponential rate fit did not meet the R^2 requirement."""


class NoBracket(EpgravError):
    """Measured shift outside the image of the root-finding bracket."""


class NonMonotone(EpgravError):
    """Bracket endpoints violate the expected ordering (defensive check)."""


class GridMiss(EpgravError):
    """Sweep grid does not span the EP drive amplitude."""


class HarnessError(EpgravError):
    """A harness-level self-check failed while assembling a study."""


class ConfigError(EpgravError):
    """Invalid run configuration (bad key, missing field, bad value)."""


class UnitError(ConfigError):
    """Dimensional quantity given without a recognized unit suffix."""
