"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so keep the three
categories (configuration, data, numerics) separate.
"""


class FlowshapError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(FlowshapError):
    """Invalid or missing configuration (files, keys, value ranges)."""


class DataError(FlowshapError):
    """Unusable input data: missing files, malformed CSV, shape mismatches."""


class NumericalError(FlowshapError):
    """Numerical failure: non-finite losses, singular solves."""
