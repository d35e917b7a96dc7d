"""In-memory image dataset container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RawDataset:
    """Normalized grayscale images (n, H, W) in [0,1] with integer labels in [0, K)."""

    images: np.ndarray
    labels: np.ndarray
    name: str
    n_classes: int = field(default=10)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 3:
            raise ValueError(f"images must be (n, H, W), got {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise ValueError(
                f"label count {self.labels.shape} does not match image count "
                f"{self.images.shape[0]}"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise ValueError("pixel values must be normalized to [0, 1]")

    def __len__(self) -> int:
        return self.images.shape[0]

    def take(self, indices: np.ndarray, name: str | None = None) -> "RawDataset":
        return RawDataset(
            images=self.images[indices],
            labels=self.labels[indices],
            name=self.name if name is None else name,
            n_classes=self.n_classes,
        )
