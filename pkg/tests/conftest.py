"""Shared fixtures: small synthetic datasets sized for fast tests."""

import pytest

from dcl.data import generate_synthetic


@pytest.fixture(scope="session")
def tiny_dataset():
    """Two attributes, mild imbalance, small enough for seconds-long runs."""
    return generate_synthetic(
        imbalance_ratios=[2.0, 8.0],
        n_samples=400,
        feature_dim=6,
        class_separation=2.0,
        noise_sd=1.0,
        seed=7,
    )


@pytest.fixture(scope="session")
def small_dataset():
    """Six attributes over a ratio spread, for determinism and CLI tests."""
    return generate_synthetic(
        imbalance_ratios=[1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        n_samples=1200,
        feature_dim=8,
        class_separation=2.5,
        noise_sd=1.0,
        seed=11,
    )
