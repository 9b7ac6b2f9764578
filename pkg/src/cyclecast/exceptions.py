"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: DataError and its subclasses exit 2,
NumericalError exits 3.
"""


class CyclecastError(Exception):
    """Base class for package-specific errors."""


class DataError(CyclecastError, ValueError):
    """Invalid, inconsistent, or insufficient input data."""


class ConfigError(DataError):
    """A scenario or controller configuration violates its invariants."""


class DegenerateSeriesError(DataError):
    """A series is constant or otherwise carries no usable variation."""


class RankDeficiencyError(DataError):
    """A regression design matrix is rank deficient."""


class NumericalError(CyclecastError, ArithmeticError):
    """A solver produced non-finite values or could not proceed."""
