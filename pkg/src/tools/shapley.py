"""
Exact Shapley Attribution Tool

Each player is one feature channel over all time steps. A coalition S keeps
the instance's values for the channels in S and takes the background's values
for the others; its value is the model's positive-class probability.

All 2**P coalition values are computed once per instance (batched) and shared
by every player's sum.
"""

import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from src.models.attribution import (
    MAX_PLAYERS,
    Attribution,
    BeeswarmRow,
    GlobalImportance,
    WaterfallStep,
)
from src.utils.errors import ConfigError, ContractError, ShapeError

Predict = Callable[[np.ndarray], np.ndarray]

EVAL_CHUNK = 1024


def _background_matrix(x: np.ndarray, background: np.ndarray) -> np.ndarray:
    background = np.asarray(background, dtype=np.float64)
    if background.ndim == 1:
        background = np.broadcast_to(background, x.shape)
    if background.shape != x.shape:
        raise ShapeError(f"background shape {background.shape} does not match instance {x.shape}")
    return background


def _players(x: np.ndarray, players: Optional[Sequence[int]]) -> List[int]:
    n_features = x.shape[1]
    players = list(range(n_features)) if players is None else list(players)
    if len(players) > MAX_PLAYERS:
        raise ConfigError(f"{len(players)} players exceed the cap of {MAX_PLAYERS}")
    if len(set(players)) != len(players) or any(not 0 <= p < n_features for p in players):
        raise ConfigError(f"players must be distinct feature indices below {n_features}")
    return players


def coalition_instance(
    x: np.ndarray, coalition: Sequence[int], background: np.ndarray, players: Sequence[int]
) -> np.ndarray:
    """Instance with non-coalition players replaced by the background channel."""
    outside = [p for p in players if p not in set(coalition)]
    mixed = np.array(x, dtype=np.float64, copy=True)
    mixed[:, outside] = background[:, outside]
    return mixed


def coalition_value(
    predict: Predict,
    x: np.ndarray,
    coalition: Sequence[int],
    background: np.ndarray,
    players: Optional[Sequence[int]] = None,
) -> float:
    x = np.asarray(x, dtype=np.float64)
    players = _players(x, players)
    if not set(coalition) <= set(players):
        raise ContractError(f"coalition {sorted(coalition)} is not a subset of the players")
    mixed = coalition_instance(x, coalition, _background_matrix(x, background), players)
    return float(predict(mixed[None])[0])


def coalition_table(
    predict: Predict, x: np.ndarray, background: np.ndarray, players: Sequence[int]
) -> np.ndarray:
    """v[mask] for every bitmask over ``players`` (bit j ↔ players[j])."""
    n = len(players)
    columns = np.array(players, dtype=np.int64)
    values = np.empty(2**n)
    for start in range(0, 2**n, EVAL_CHUNK):
        masks = np.arange(start, min(start + EVAL_CHUNK, 2**n))
        keep = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
        batch = np.repeat(x[None], len(masks), axis=0)
        # take background where the player is absent from the coalition
        swap = np.zeros((len(masks), x.shape[1]), dtype=bool)
        swap[:, columns] = ~keep
        batch = np.where(swap[:, None, :], background[None], batch)
        values[start : start + len(masks)] = predict(batch)
    return values


def shapley_weights(n: int) -> np.ndarray:
    """w[s] = s! (n - s - 1)! / n! for coalition size s."""
    total = math.factorial(n)
    return np.array(
        [math.factorial(s) * math.factorial(n - s - 1) / total for s in range(n)], dtype=np.float64
    )


def exact_shapley(
    predict: Predict,
    x: np.ndarray,
    background: np.ndarray,
    feature_names: Sequence[str],
    ar_id: int = 0,
    players: Optional[Sequence[int]] = None,
) -> Attribution:
    """
    φ_i = Σ_{S ⊆ P \\ {i}} w(|S|) · (v(S ∪ {i}) − v(S)),  φ0 = v(∅).

    ``phi`` is indexed like ``players`` (all features by default).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(feature_names):
        raise ShapeError(f"instance shape {x.shape} does not match {len(feature_names)} features")
    players = _players(x, players)
    bg = _background_matrix(x, background)
    n = len(players)

    values = coalition_table(predict, x, bg, players)
    weights = shapley_weights(n)
    masks = np.arange(2**n)
    sizes = np.array([bin(m).count("1") for m in masks])

    phi = []
    for j in range(n):
        without = masks[(masks >> j) & 1 == 0]
        gains = values[without | (1 << j)] - values[without]
        phi.append(float(np.sum(weights[sizes[without]] * gains)))

    return Attribution(
        ar_id=ar_id,
        feature_names=[feature_names[p] for p in players],
        phi0=float(values[0]),
        phi=phi,
        f_x=float(values[-1]),
        evaluations=int(values.size),
    )


def global_importance(attributions: Sequence[Attribution]) -> GlobalImportance:
    """Mean absolute φ per feature across ARs."""
    if not attributions:
        raise ContractError("no attributions to aggregate")
    names = attributions[0].feature_names
    for a in attributions:
        if a.feature_names != names:
            raise ShapeError(f"AR {a.ar_id}: attribution features differ")
    phi = np.array([a.phi for a in attributions])
    return GlobalImportance(feature_names=list(names), phi_global=np.abs(phi).mean(axis=0).tolist())


def waterfall_data(attribution: Attribution) -> List[WaterfallStep]:
    """Features by |φ| descending with running totals from φ0 to f(x)."""
    order = sorted(range(len(attribution.phi)), key=lambda i: -abs(attribution.phi[i]))
    steps = []
    running = attribution.phi0
    for i in order:
        running += attribution.phi[i]
        steps.append(
            WaterfallStep(
                feature=attribution.feature_names[i], phi=attribution.phi[i], running_total=running
            )
        )
    return steps


def beeswarm_data(
    attributions: Sequence[Attribution], series: Mapping[int, np.ndarray]
) -> List[BeeswarmRow]:
    """
    One row per (AR, feature). ``series[ar_id]`` is the T×P matrix whose
    columns follow the attribution's features; the magnitude is the channel's
    time-mean, min-max normalized across the explained ARs (0.5 when the range
    is zero).
    """
    if not attributions:
        raise ContractError("no attributions for a beeswarm")
    names = attributions[0].feature_names
    means: Dict[int, np.ndarray] = {}
    for a in attributions:
        if a.ar_id not in series:
            raise ContractError(f"no feature series for AR {a.ar_id}")
        channel_means = np.asarray(series[a.ar_id], dtype=np.float64).mean(axis=0)
        if channel_means.shape != (len(names),):
            raise ShapeError(f"AR {a.ar_id}: series has {channel_means.size} channels")
        means[a.ar_id] = channel_means
    table = np.array([means[a.ar_id] for a in attributions])
    low = table.min(axis=0)
    span = table.max(axis=0) - low

    rows = []
    for a in attributions:
        for j, feature in enumerate(names):
            magnitude = 0.5 if span[j] == 0 else float((means[a.ar_id][j] - low[j]) / span[j])
            rows.append(
                BeeswarmRow(feature=feature, ar_id=a.ar_id, phi=a.phi[j], magnitude=magnitude)
            )
    return rows
