"""Exception types shared across the package.

Plain ``ValueError`` is raised for precondition violations (bad arguments,
malformed files).  The classes below mark numeric failures that a caller may
want to catch separately, e.g. to retry at a different scale.
"""


class FiltdimError(Exception):
    """Base class for numeric/runtime failures (not argument validation)."""


class ScaleOutOfRangeError(FiltdimError):
    """A filtered norm underflowed: the requested scale is unusable."""


class DegenerateSeriesError(FiltdimError):
    """A sampled log-log series has too few finite points to estimate orders."""
