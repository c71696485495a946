"""Exception types shared across the package.

The CLI maps these onto its documented exit codes: ConfigError -> 2,
ContainerFormatError and OS-level I/O failures -> 3, NumericalError -> 4.
Plain ValueError from library code counts as a validation failure (exit 2).
"""


class FpmError(Exception):
    pass


class ConfigError(FpmError):
    """Invalid experiment configuration or command-line arguments."""


class ContainerFormatError(FpmError):
    """Malformed or inconsistent FPMS container file."""


class NumericalError(FpmError):
    """Non-finite energy or divergence during reconstruction.

    Carries the partial result (estimate + energy trace up to the failure)
    in ``partial`` when available.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
