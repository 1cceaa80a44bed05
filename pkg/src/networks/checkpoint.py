"""
Model construction and checkpoint files.

A checkpoint file is a versioned JSON container: network config, seed, flat
parameter arrays with their shapes, batch-norm running statistics and the
training record that selected them. Floats are written with full repr
precision, so a save/load round trip is exact.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import TypeAdapter, ValidationError

from src.engine.layers import bn_snapshot, restore_bn, set_parameters, snapshot
from src.models.network import MLPConfig, TransformerConfig
from src.models.training import Checkpoint
from src.networks.base import Classifier
from src.networks.mlp import MLPClassifier
from src.networks.transformer import TransformerClassifier
from src.utils.errors import ConfigError, DataError

CHECKPOINT_FORMAT = "cdr-flare-checkpoint"
CHECKPOINT_VERSION = 1

NetworkConfig = Union[TransformerConfig, MLPConfig]
_config_adapter = TypeAdapter(NetworkConfig)


def build_model(config: NetworkConfig, seed: int = 0) -> Classifier:
    """Initialize a classifier; identical (config, seed) gives identical parameters."""
    if isinstance(config, TransformerConfig):
        return TransformerClassifier(config, seed)
    if isinstance(config, MLPConfig):
        return MLPClassifier(config, seed)
    raise ConfigError(f"unsupported network config {type(config).__name__}")


def capture(
    model: Classifier, *, monitor: str = "TSS", score: float = float("nan"), step: int = 0
) -> Checkpoint:
    params = snapshot(model)
    return Checkpoint(
        monitor=monitor,
        score=score,
        step=step,
        parameters={name: value.ravel().tolist() for name, value in params.items()},
        shapes={name: list(value.shape) for name, value in params.items()},
        bn_stats={
            name: [mean.tolist(), var.tolist()] for name, (mean, var) in bn_snapshot(model).items()
        },
    )


def apply_checkpoint(model: Classifier, checkpoint: Checkpoint) -> Classifier:
    set_parameters(
        model,
        {
            name: np.asarray(flat, dtype=np.float64).reshape(checkpoint.shapes[name])
            for name, flat in checkpoint.parameters.items()
        },
    )
    restore_bn(model, {name: (mv[0], mv[1]) for name, mv in checkpoint.bn_stats.items()})
    return model


def save_model(
    path: Union[str, Path],
    model: Classifier,
    checkpoint: Optional[Checkpoint] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    checkpoint = checkpoint or capture(model)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": model.config.model_dump(),
        "seed": model.seed,
        "checkpoint": checkpoint.model_dump(),
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")
    return path


def load_model(path: Union[str, Path]) -> Tuple[Classifier, Checkpoint, Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"checkpoint {path} is not valid JSON: {e}") from e

    if payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path} is not a model checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {payload.get('version')}")

    try:
        config = _config_adapter.validate_python(payload["config"])
        checkpoint = Checkpoint.model_validate(payload["checkpoint"])
    except (KeyError, ValidationError) as e:
        raise DataError(f"checkpoint {path} is malformed: {e}") from e

    model = build_model(config, payload.get("seed", 0))
    apply_checkpoint(model, checkpoint)
    return model, checkpoint, payload.get("extra", {})
