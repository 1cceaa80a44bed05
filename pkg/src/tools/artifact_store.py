"""
Artifact Store Tool

Persists run outputs (JSON documents, CSV tables) inside a run directory and
writes the run manifest: config echo, seed and SHA-256 content hashes of
every input and artifact.

Nothing written here carries a timestamp, so rerunning a command with the
same config, seed and inputs reproduces every file byte for byte.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import pandas as pd
from pydantic import ValidationError

from src.config.settings import settings
from src.models.run import ArtifactEntry, Manifest, RunConfig
from src.utils.errors import DataError

MANIFEST_NAME = "manifest.json"

PathLike = Union[str, Path]


def get_runs_dir() -> Path:
    """Get or create the runs root (``CDR_RUNS_DIR``)."""
    runs_dir = settings.runs_path()
    runs_dir.mkdir(parents=True, exist_ok=True)
    return runs_dir


def resolve_run_dir(output_dir: Optional[PathLike], command: str) -> Path:
    """The given directory, or ``<runs>/<command>`` when none is given."""
    run_dir = Path(output_dir) if output_dir else get_runs_dir() / command
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def save_json(run_dir: PathLike, name: str, payload: Any) -> Path:
    """
    Write a JSON artifact with sorted keys.

    Example:
        >>> save_json("runs/eval", "report.json", report.model_dump())
        PosixPath('runs/eval/report.json')
    """
    path = Path(run_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def save_table(run_dir: PathLike, name: str, frame: pd.DataFrame) -> Path:
    """Write a CSV artifact with a header row and repr-precision floats."""
    path = Path(run_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=lambda v: repr(float(v)), lineterminator="\n")
    return path


def load_table(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError(f"table not found: {path}")
    try:
        return pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"cannot read {path}: {e}") from e


def list_artifacts(run_dir: PathLike) -> List[ArtifactEntry]:
    """Every file under the run directory except the manifest, sorted by path."""
    run_dir = Path(run_dir)
    entries = []
    for path in sorted(p for p in run_dir.rglob("*") if p.is_file()):
        relative = path.relative_to(run_dir).as_posix()
        if relative == MANIFEST_NAME:
            continue
        entries.append(
            ArtifactEntry(path=relative, sha256=file_sha256(path), bytes=path.stat().st_size)
        )
    return entries


def write_manifest(
    run_dir: PathLike,
    run: RunConfig,
    inputs: Optional[Mapping[str, PathLike]] = None,
    notes: Optional[str] = None,
) -> Path:
    """Hash inputs and artifacts and write ``manifest.json`` last."""
    input_hashes: Dict[str, str] = {}
    for label, path in sorted((inputs or {}).items()):
        path = Path(path)
        if path.is_file():
            input_hashes[label] = file_sha256(path)
        elif path.is_dir() and (path / MANIFEST_NAME).exists():
            input_hashes[label] = file_sha256(path / MANIFEST_NAME)
    manifest = Manifest(
        run=run, input_hashes=input_hashes, artifacts=list_artifacts(run_dir), notes=notes
    )
    return save_json(run_dir, MANIFEST_NAME, manifest.model_dump())


def load_manifest(run_dir: PathLike) -> Manifest:
    path = Path(run_dir) / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"no manifest in {run_dir}")
    try:
        return Manifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise DataError(f"malformed manifest {path}: {e}") from e
