"""Encoded feature matrices: what the autoencoder produces and the agent consumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LatentFeatures:
    """n x m feature matrix with aligned labels in [0, n_classes)."""

    features: np.ndarray
    labels: np.ndarray
    source_dataset: str
    n_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(
                f"label count {self.labels.shape} does not match feature rows "
                f"{self.features.shape[0]}"
            )
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")
        if self.n_classes <= 0:
            raise ValueError(f"n_classes must be positive, got {self.n_classes}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.features.shape[1]
