"""Exception types shared across the harness.

The CLI maps these onto its documented exit codes: ConfigError -> 2,
ContainerFormatError and OS-level I/O failures -> 3. Plain ValueError
from library code counts as a validation failure (exit 2).
"""


class HarnessError(Exception):
    pass


class ConfigError(HarnessError):
    """Invalid experiment configuration or command-line arguments."""


class ContainerFormatError(HarnessError):
    """Malformed or inconsistent FPMS container file."""
