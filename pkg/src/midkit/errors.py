"""Exception hierarchy.

DataError covers everything wrong with inputs (files, columns, levels,
shapes); NumericalError covers solver failures. The CLI maps these to
exit codes 3 and 4 respectively.
"""


class MidkitError(Exception):
    """Base class for all package errors."""


class DataError(MidkitError):
    """Invalid or inconsistent input data."""


class UnknownLevelError(DataError):
    """A categorical value was not seen when the encoder was built."""

    def __init__(self, feature, level):
        self.feature = feature
        self.level = level
        super().__init__(f"unknown level {level!r} for feature {feature!r}")


class UndefinedRatioError(MidkitError):
    """A ratio statistic whose denominator is zero (constant predictions)."""


class NumericalError(MidkitError):
    """A numerical method failed (factorization breakdown, non-finite input)."""


class ModelFormatError(DataError):
    """A model file could not be read (corrupt or unsupported version)."""
