"""
Finite-difference gradient checks for the tensor engine tests.
"""

from typing import Callable

import numpy as np

STEP = 1e-5


def numerical_gradient(f: Callable[[], float], value: np.ndarray, step: float = STEP) -> np.ndarray:
    """Central differences of ``f`` with respect to ``value`` (perturbed in place)."""
    grad = np.zeros_like(value)
    it = np.nditer(value, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        original = value[idx]
        value[idx] = original + step
        up = f()
        value[idx] = original - step
        down = f()
        value[idx] = original
        grad[idx] = (up - down) / (2 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-8)
    return float(np.abs(analytic - numeric).max() / scale)
