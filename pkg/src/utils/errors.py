"""
Error types shared across the toolkit.

Every error carries an ``error_type`` slug (the same classification idea the
SQL executor used for its result dicts) and the CLI exit code it maps to.
"""

from typing import Optional


class FlareForecastError(Exception):
    """Base class for all toolkit errors."""

    error_type: str = "error"
    exit_code: int = 1

    def __init__(self, message: str, *, error_type: Optional[str] = None):
        super().__init__(message)
        if error_type is not None:
            self.error_type = error_type


class ConfigError(FlareForecastError):
    """Invalid configuration value or combination."""

    error_type = "config_error"
    exit_code = 1


class ContractError(FlareForecastError):
    """A caller violated an operation's precondition."""

    error_type = "contract_error"
    exit_code = 1


class DataError(FlareForecastError):
    """Input data is malformed or inconsistent."""

    error_type = "data_error"
    exit_code = 2


class IngestionError(DataError):
    """A dataset or grid file could not be parsed."""

    error_type = "ingestion_error"

    def __init__(self, message: str, *, ar_id: Optional[int] = None, line: Optional[int] = None):
        location = []
        if ar_id is not None:
            location.append(f"ar_id={ar_id}")
        if line is not None:
            location.append(f"line={line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.ar_id = ar_id
        self.line = line


class SplitError(DataError):
    """Cross-validation splits cannot be formed."""

    error_type = "split_error"


class ShapeError(DataError):
    """Tensor or grid shapes do not agree."""

    error_type = "shape_error"


class UndefinedMetricError(DataError):
    """A verification metric is undefined for the given labels."""

    error_type = "undefined_metric"


class DegenerateTestError(DataError):
    """A statistical test has zero variance and no finite statistic."""

    error_type = "degenerate_test"


class NumericalError(FlareForecastError):
    """Non-finite values appeared during computation."""

    error_type = "numerical_error"
    exit_code = 3


class TrainingError(NumericalError):
    """Training produced a NaN loss or gradient."""

    error_type = "training_error"
