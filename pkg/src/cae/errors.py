"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: usage problems exit 2
(argparse's own convention), data-format problems exit 3, and numerical
stability failures exit 4.
"""


class CAEError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CAEError):
    """Invalid configuration detected before any computation runs."""

    exit_code = 2


class DataFormatError(CAEError):
    """A file or in-memory payload violates an on-disk format contract."""

    exit_code = 3


class NumericalStabilityError(CAEError):
    """A numerical routine left its stable operating range."""

    exit_code = 4
