"""Exception types shared across the package."""


class UnsupportedModulationError(ValueError):
    """Constellation order is not a supported square QAM size."""


class UnsupportedCombinationError(ValueError):
    """Requested precoder / modulation / dimension combination is not available."""


class DegenerateChannelError(ValueError):
    """A singular value (or pair distance) is zero, so power control is undefined."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced inconsistent results."""


class LatticeDataError(ValueError):
    """A bundled or user-supplied rotation matrix file is missing or invalid."""
