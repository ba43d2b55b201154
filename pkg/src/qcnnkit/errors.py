"""Error taxonomy shared by the library, service and CLI.

ConfigError covers bad keys, values or combinations in experiment
configuration.  DataError covers malformed or unreadable input data
(corrupt IDX headers, truncated payloads, label mismatches).  Plain
ValueError remains the signal for programming errors at the library API.
"""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class DataError(ValueError):
    """Malformed or inconsistent input data."""
