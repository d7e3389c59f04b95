"""Exception types shared across the toolkit."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (exit code 1)."""


class DataError(Exception):
    """Malformed input data or file (exit code 2)."""


class ModelFormatError(DataError):
    """Model document violates the schema or is internally inconsistent."""


class NumericalError(Exception):
    """Non-finite loss or other numerical breakdown during training (exit code 3)."""
