"""Exception hierarchy shared by all modules."""


class SicFreeError(Exception):
    """Base class for every error raised by this package."""


class InvalidParametersError(SicFreeError, ValueError):
    pass


class GenerationInfeasibleError(SicFreeError, RuntimeError):
    """A coefficient matrix could not be produced for the requested setup."""


class DecodabilityError(SicFreeError, ValueError):
    """Some user-specific coefficient submatrix is singular."""


class DegenerateChannelError(SicFreeError, ValueError):
    """The zero-forcing null space of a multicast group is not one-dimensional."""


class InitInfeasibleError(SicFreeError, ValueError):
    pass


class InvalidExpansionPointError(SicFreeError, ValueError):
    pass


class SweepError(SicFreeError, RuntimeError):
    pass


class ConfigError(SicFreeError, ValueError):
    """Malformed sweep configuration."""
