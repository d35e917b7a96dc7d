"""Seeded train/test splitting for datasets without an official test file."""

from __future__ import annotations

from ..exceptions import ConfigError
from ..rng import SeededRng
from .dataset import RawDataset


def train_test_split(ds: RawDataset, test_fraction: float, seed: int):
    """Disjoint, exhaustive, seeded-shuffle split into (train, test)."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(ds)
    n_test = int(n * test_fraction)
    if n_test == 0 or n_test == n:
        raise ConfigError(
            f"split of {n} samples at fraction {test_fraction} leaves an empty side"
        )
    perm = SeededRng(seed).permutation(n)
    return ds.take(perm[n_test:]), ds.take(perm[:n_test])


def subset(ds: RawDataset, n: int, seed: int) -> RawDataset:
    """Seeded random subset of size n (n <= len(ds))."""
    if not 0 < n <= len(ds):
        raise ConfigError(f"subset size {n} invalid for dataset of {len(ds)}")
    perm = SeededRng(seed).permutation(len(ds))
    return ds.take(perm[:n])
