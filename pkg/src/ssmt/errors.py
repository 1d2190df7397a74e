"""Exception types shared across the package.

Plain ``ValueError`` is used for bad parameters (wrong alpha, negative
counts, ...). The classes below exist so the CLI can map failures to its
exit codes: 1 usage, 2 data, 3 numerical.
"""


class UsageError(ValueError):
    """The request itself is malformed (bad flags, empty inputs, ...)."""


class DataError(ValueError):
    """Input data is unusable (non-finite values, parse failures, ...)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced garbage."""
