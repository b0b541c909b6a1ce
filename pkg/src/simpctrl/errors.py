"""Exception hierarchy shared across the toolkit.

Plain ``ValueError`` is reserved for domain errors on individual values
(empty inputs, out-of-range ratios).  The classes below mark failures
with a well-defined process exit code in the CLI.
"""


class ToolkitError(Exception):
    """Base class for toolkit-specific failures."""


class InputError(ToolkitError):
    """Malformed or misaligned input data (CLI exit code 1)."""


class ConfigError(ToolkitError):
    """Missing resources or invalid invocation (CLI exit code 2)."""


class SystemRunError(ToolkitError):
    """An external simplification command failed (CLI exit code 3)."""
