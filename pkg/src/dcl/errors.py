"""Exception hierarchy shared across the package.

Programming errors (bad types, out-of-range arguments to low level math
helpers) raise plain ValueError.  The classes below cover failures that a
caller may reasonably want to catch and report: bad run configuration,
unusable input data, and numeric blow-ups during training.
"""


class DclError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DclError):
    """A run configuration is inconsistent or out of range."""


class DataError(DclError):
    """Input data is missing, malformed, or fails validation."""


class NumericError(DclError):
    """Training produced non-finite values and cannot continue."""
