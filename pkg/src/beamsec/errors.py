"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration document. `path` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DatasetFormatError(ValueError):
    """Corrupt or unsupported dataset file. `offset` is the byte position."""

    def __init__(self, message: str, offset: int = 0):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


class CalibrationError(RuntimeError):
    """Threshold calibration cannot proceed (e.g. degenerate null data)."""


class SampleBudgetError(RuntimeError):
    """A sample-size search exhausted its budget without reaching the target."""
