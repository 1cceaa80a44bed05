"""
Run Models

Run configuration echoed into every run directory, and the manifest that
records the seed and content hashes of each artifact.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunConfig(BaseModel):
    """
    Everything a CLI command was invoked with.

    Example:
        {"command": "train-cdr", "seed": 7, "inputs": {"dataset": "runs/synth/dataset.csv"},
         "options": {"split_index": 0, "features": "all10"}, "output_dir": "runs/cdr"}
    """

    command: str
    seed: int
    inputs: Dict[str, str] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict)
    output_dir: str


class ArtifactEntry(BaseModel):
    path: str = Field(..., description="Path relative to the run directory")
    sha256: str
    bytes: int


class Manifest(BaseModel):
    """Audit record of one run directory; contains no wall-clock data."""

    run: RunConfig
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    artifacts: List[ArtifactEntry] = Field(default_factory=list)
    notes: Optional[str] = None
