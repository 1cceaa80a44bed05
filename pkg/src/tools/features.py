"""
Feature Extraction Tool

Magnetogram feature families computed from 2-D field grids:

    - gradient statistics (7 values)
    - Haar wavelet detail energies (one per level)
    - flux sums (unsigned, signed, negative, positive)
    - SHARP summation keywords from co-registered vector-field maps

plus the grid file reader/writer and the per-AR series builder used by
``extract-features``.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import pywt
from scipy import stats

from src.models.dataset import SERIES_LENGTH, VECTOR_FEATURES, ARRecord
from src.models.features import (
    FLUX_COLUMNS,
    GRADIENT_COLUMNS,
    WAVELET_COLUMNS,
    FieldGrid,
    VectorFieldMaps,
)
from src.utils.errors import ConfigError, IngestionError, ShapeError

logger = logging.getLogger(__name__)

MIN_VARIANCE = 1e-24

MAP_ORDER = ["bz", "jz", "shear_deg", "b_obs", "b_pot"]


def gradient_stats(grid: FieldGrid) -> List[float]:
    """
    Mean, std, median, min, max, skewness and kurtosis of the gradient
    magnitude. Skewness and (excess) kurtosis are 0 for a zero-variance field.
    """
    if grid.height < 2 or grid.width < 2:
        raise ShapeError(f"gradient needs at least a 2×2 grid, got {grid.height}×{grid.width}")
    gy, gx = np.gradient(grid.values)
    magnitude = np.sqrt(gx**2 + gy**2).ravel()
    if magnitude.var() < MIN_VARIANCE:
        skew = kurt = 0.0
    else:
        skew = float(stats.skew(magnitude))
        kurt = float(stats.kurtosis(magnitude))
    return [
        float(magnitude.mean()),
        float(magnitude.std()),
        float(np.median(magnitude)),
        float(magnitude.min()),
        float(magnitude.max()),
        skew,
        kurt,
    ]


def mirror_pad(values: np.ndarray, levels: int) -> np.ndarray:
    """Pad bottom/right by mirroring up to the next multiple of 2**levels."""
    block = 2**levels
    pad_h = -values.shape[0] % block
    pad_w = -values.shape[1] % block
    if not pad_h and not pad_w:
        return values
    return np.pad(values, ((0, pad_h), (0, pad_w)), mode="symmetric")


def haar_energies(grid: FieldGrid, levels: int = 5) -> List[float]:
    """Sum of squared LH, HL and HH coefficients at each level, finest first."""
    if levels < 1:
        raise ConfigError(f"wavelet levels must be at least 1, got {levels}")
    padded = mirror_pad(grid.values, levels)
    coeffs = pywt.wavedec2(padded, "haar", mode="periodization", level=levels)
    # coeffs = [approximation, coarsest details, ..., finest details]
    details = coeffs[1:][::-1]
    return [float(sum(np.sum(band**2) for band in bands)) for bands in details]


def flux_features(grid: FieldGrid) -> List[float]:
    """(unsigned, signed, negative, positive) flux sums."""
    v = grid.values
    negative = float(np.minimum(v, 0.0).sum())
    positive = float(np.maximum(v, 0.0).sum())
    return [float(np.abs(v).sum()), positive + negative, negative, positive]


def _check_maps(maps: VectorFieldMaps) -> None:
    reference = maps.bz
    for name in MAP_ORDER[1:]:
        grid = getattr(maps, name)
        if grid.values.shape != reference.values.shape:
            raise ShapeError(
                f"map '{name}' has shape {grid.values.shape}, bz has {reference.values.shape}"
            )
        if grid.pixel_area != reference.pixel_area:
            raise ShapeError(f"map '{name}' pixel area differs from bz")


def sharp_sums(maps: VectorFieldMaps) -> List[float]:
    """
    The eight SHARP summation keywords, proportionality constants set to 1.

    Returns values in the order TOTUSJZ, TOTUSJH, TOTPOT, ABSNJZH, SAVNCPP,
    USFLUX, MEANPOT, SHRGT45.
    """
    _check_maps(maps)
    bz = maps.bz.values
    jz = maps.jz.values
    dA = maps.bz.pixel_area
    n = bz.size
    excess = (maps.b_obs.values - maps.b_pot.values) ** 2
    helicity = bz * jz

    totusjz = float(np.abs(jz).sum() * dA)
    totusjh = float(np.abs(helicity).sum())
    totpot = float(excess.sum() * dA)
    absnjzh = float(abs(helicity.sum()))
    savncpp = float(abs((jz[bz > 0] * dA).sum()) + abs((jz[bz < 0] * dA).sum()))
    usflux = float(np.abs(bz).sum() * dA)
    meanpot = float(excess.sum() / n)
    shrgt45 = float(np.count_nonzero(maps.shear_deg.values > 45.0) / n)
    return [totusjz, totusjh, totpot, absnjzh, savncpp, usflux, meanpot, shrgt45]


def grid_features(grid: FieldGrid, levels: int = 5) -> List[float]:
    """Gradient, wavelet and flux families of one grid, in column order."""
    return gradient_stats(grid) + haar_energies(grid, levels) + flux_features(grid)


def extract_columns(levels: int = 5, vector: bool = False) -> List[str]:
    wavelet = WAVELET_COLUMNS if levels == 5 else [f"HAAR_E{i}" for i in range(1, levels + 1)]
    columns = GRADIENT_COLUMNS + wavelet + FLUX_COLUMNS
    return columns + list(VECTOR_FEATURES) if vector else columns


# Grid files ---------------------------------------------------------------


def read_grids(path: Union[str, Path]) -> List[FieldGrid]:
    """
    Read a grid file: repeated blocks of an ``H,W,dA`` header line followed by
    H lines of W comma-separated decimals. Blank lines are ignored.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"grid file not found: {path}")
    lines = [
        (number, line.strip())
        for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1)
        if line.strip()
    ]
    grids = []
    cursor = 0
    while cursor < len(lines):
        number, header = lines[cursor]
        try:
            h_text, w_text, area_text = header.split(",")
            height, width, area = int(h_text), int(w_text), float(area_text)
        except ValueError:
            raise IngestionError(f"{path.name}: bad grid header {header!r}", line=number) from None
        block = lines[cursor + 1 : cursor + 1 + height]
        if len(block) != height:
            raise IngestionError(f"{path.name}: grid truncated", line=number)
        rows = []
        for row_number, text in block:
            cells = text.split(",")
            if len(cells) != width:
                raise IngestionError(
                    f"{path.name}: expected {width} values, found {len(cells)}", line=row_number
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise IngestionError(
                    f"{path.name}: non-numeric grid value", line=row_number
                ) from None
        try:
            grids.append(FieldGrid(values=rows, pixel_area=area))
        except ValueError as e:
            raise IngestionError(f"{path.name}: {e}", line=number) from None
        cursor += 1 + height
    return grids


def write_grids(grids: Sequence[FieldGrid], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = []
    for grid in grids:
        out.append(f"{grid.height},{grid.width},{grid.pixel_area!r}")
        out.extend(",".join(repr(float(v)) for v in row) for row in grid.values)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def _vector_maps(grids: List[FieldGrid]) -> List[VectorFieldMaps]:
    step = len(MAP_ORDER)
    return [
        VectorFieldMaps(**dict(zip(MAP_ORDER, grids[i : i + step])))
        for i in range(0, len(grids), step)
    ]


def extract_series(
    magnetograms: Sequence[FieldGrid],
    maps: Optional[Sequence[VectorFieldMaps]] = None,
    levels: int = 5,
) -> np.ndarray:
    """One feature row per time step (40 magnetograms, optional 40 map sets)."""
    if len(magnetograms) != SERIES_LENGTH:
        raise ShapeError(f"expected {SERIES_LENGTH} magnetograms, got {len(magnetograms)}")
    rows = [grid_features(g, levels) for g in magnetograms]
    if maps is not None:
        if len(maps) != SERIES_LENGTH:
            raise ShapeError(f"expected {SERIES_LENGTH} vector map sets, got {len(maps)}")
        rows = [row + sharp_sums(m) for row, m in zip(rows, maps)]
    return np.array(rows, dtype=np.float64)


def extract_index(index_path: Union[str, Path], levels: int = 5) -> List[ARRecord]:
    """
    Build AR records from an index CSV with columns
    ``ar_id,class_label,multi_ar,magnetograms[,vector_maps]``.

    ``magnetograms`` names a grid file of 40 grids; ``vector_maps`` (optional,
    all rows or none) names a grid file of 40 × (bz, jz, shear_deg, b_obs,
    b_pot) grids. Paths are relative to the index file.
    """
    index_path = Path(index_path)
    if not index_path.exists():
        raise IngestionError(f"index not found: {index_path}")
    df = pd.read_csv(index_path, dtype=str, keep_default_na=False, encoding="utf-8")
    required = ["ar_id", "class_label", "multi_ar", "magnetograms"]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise IngestionError(f"{index_path.name}: missing column(s) {', '.join(missing)}")
    vector = "vector_maps" in df.columns
    columns = extract_columns(levels, vector)
    base = index_path.parent

    records = []
    for idx, row in df.iterrows():
        line = int(idx) + 2
        magnetograms = read_grids(base / row["magnetograms"])
        maps_file = read_grids(base / row["vector_maps"]) if vector else None
        try:
            maps = _vector_maps(maps_file) if maps_file is not None else None
            series = extract_series(magnetograms, maps, levels)
            records.append(
                ARRecord(
                    ar_id=int(row["ar_id"]),
                    class_label=row["class_label"],
                    multi_ar=row["multi_ar"] == "1",
                    feature_names=columns,
                    series=series,
                )
            )
        except (ShapeError, ValueError) as e:
            raise IngestionError(str(e), ar_id=_maybe_int(row["ar_id"]), line=line) from None
    logger.info("Extracted %d feature columns for %d ARs", len(columns), len(records))
    return records


def _maybe_int(value: str) -> Optional[int]:
    return int(value) if value.isdigit() else None

