"""
Shared fixtures: seeded generators and small synthetic datasets.
"""

import numpy as np
import pytest

from src.models.dataset import SyntheticConfig
from src.tools.splits import make_cv_splits
from src.tools.synthetic import generate_synthetic


@pytest.fixture
def rng():
    """Seeded generator for reproducibility."""
    return np.random.default_rng(42)


@pytest.fixture
def small_config():
    return SyntheticConfig(counts=[30, 24, 12, 6], separation=3.0, multi_ar_fraction=0.2)


@pytest.fixture
def small_records(small_config):
    return generate_synthetic(small_config, seed=3)


@pytest.fixture
def small_splits(small_records):
    return make_cv_splits(small_records, n_splits=3, seed=5)


@pytest.fixture
def separable_records():
    """High-separation data on which a mean-threshold rule already scores TSS > 0.9."""
    config = SyntheticConfig(counts=[60, 50, 40, 10], separation=3.0, multi_ar_fraction=0.0)
    return generate_synthetic(config, seed=11)
