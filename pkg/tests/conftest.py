"""Shared fixtures: a small separable classification problem."""

import pytest

from fedsim.data import SyntheticSpec, generate_synthetic, split_train_test
from fedsim.model import MlpArchitecture


@pytest.fixture
def small_problem():
    """(arch, train, test) for a quickly solvable two-blob task."""
    spec = SyntheticSpec(
        class_count=2, dims=3, samples_per_class=60, center_separation=6.0, noise_stddev=1.0
    )
    ds = generate_synthetic(spec, seed=100)
    train, test = split_train_test(ds, 0.25, seed=100)
    arch = MlpArchitecture((3, 8, 2))
    return arch, train, test
