"""Exception and warning types shared across the package."""


class RegionateError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(RegionateError):
    """Input files or tables are malformed or inconsistent."""


class NumericalError(RegionateError):
    """A numerical routine failed (e.g. an eigensolver did not converge)."""


class DegenerateAffinityWarning(UserWarning):
    """The combined affinity has more connected components than clusters."""
