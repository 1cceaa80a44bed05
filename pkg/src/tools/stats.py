"""
Paired t-test on per-fold scores.
"""

import math
from typing import Optional, Sequence

import numpy as np
from scipy.special import betainc

from src.models.metrics import TTestResult
from src.utils.errors import ContractError, DegenerateTestError, ShapeError


def t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p-value of Student's t via the regularized incomplete beta."""
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return min(max(p, 0.0), 1.0)


def paired_ttest(
    a: Sequence[float], b: Sequence[float], label: Optional[str] = None
) -> TTestResult:
    """
    t = mean(d) / (std(d) / sqrt(n)) on d = a - b, with n - 1 degrees of freedom.

    Raises:
        DegenerateTestError: the differences have zero variance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"paired samples differ in shape: {a.shape} vs {b.shape}")
    n = a.size
    if n < 2:
        raise ContractError(f"paired t-test needs at least 2 pairs, got {n}")
    d = a - b
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise DegenerateTestError("differences have zero variance; t is undefined")
    mean = float(d.mean())
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    return TTestResult(t=t, p_value=t_two_sided_p(t, df), df=df, mean_difference=mean, label=label)
