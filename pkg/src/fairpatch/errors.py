"""Exception hierarchy shared across the package.

The CLI maps ConfigError/SchemaError/DataError to exit code 2 (bad input)
and everything else to exit code 1 (runtime failure).
"""


class FairpatchError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FairpatchError):
    """A configuration value violates its contract."""


class SchemaError(FairpatchError):
    """An input file does not have the expected columns or structure."""


class DataError(FairpatchError):
    """Data content is unusable (empty after filtering, wrong domain, ...)."""


class SamplingError(FairpatchError):
    """A minipatch draw cannot be satisfied (too few positive weights)."""
