"""
Application Configuration
Default model, trainer, split and generator settings, overridable by a JSON
run config.
"""

import json
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, Field, ValidationError

from src.models.dataset import SplitConfig, SyntheticConfig
from src.models.network import MLPConfig, TransformerConfig
from src.models.training import CDRConfig, DLTrainConfig
from src.utils.errors import ConfigError


class EvalConfig(BaseModel):
    """Evaluation options"""
    threshold: float = Field(0.5, ge=0, le=1)


class AppConfig(BaseModel):
    """Main application configuration"""
    version: str = "0.1.0"

    network: Union[TransformerConfig, MLPConfig] = Field(
        default_factory=TransformerConfig, discriminator="kind"
    )
    split: SplitConfig = Field(default_factory=SplitConfig)
    synthetic: SyntheticConfig = Field(default_factory=SyntheticConfig)
    dl: DLTrainConfig = Field(default_factory=DLTrainConfig)
    cdr: CDRConfig = Field(default_factory=CDRConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)


def load_config(path: Optional[Union[str, Path]] = None) -> AppConfig:
    """Load a JSON run config over the defaults."""

    if path is None:
        return AppConfig()

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e

    try:
        return AppConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"invalid config {path}: {e.errors()[0]['msg']}") from e
