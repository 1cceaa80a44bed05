"""
Configuration settings for the CDR flare forecasting toolkit.
"""

from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.utils.errors import ConfigError

# Load environment variables
load_dotenv()

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """Application settings loaded from ``CDR_*`` environment variables."""

    model_config = SettingsConfigDict(env_prefix="CDR_", env_file=".env", extra="ignore")

    # Logging Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Run Settings
    RUNS_DIR: str = "runs"
    JOBS: int = 1
    SEED: int = 0

    def validate_settings(self) -> bool:
        """Validate setting combinations."""
        if self.LOG_LEVEL.upper() not in _LOG_LEVELS:
            raise ConfigError(f"CDR_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}")
        if self.JOBS < 1:
            raise ConfigError("CDR_JOBS must be at least 1")
        return True

    def runs_path(self) -> Path:
        return Path(self.RUNS_DIR)


# Singleton instance
settings = Settings()
