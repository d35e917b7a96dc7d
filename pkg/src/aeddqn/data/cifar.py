"""CIFAR-10 binary batch parsing with on-the-fly grayscale conversion.

A batch is a sequence of 3073-byte records: 1 label byte followed by
1024 red, 1024 green, 1024 blue pixel bytes (row-major 32x32). Images are
reduced to one channel via the luminosity formula, giving 1024 features.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import FormatError
from .dataset import RawDataset

RECORD_BYTES = 3073
SIDE = 32


def parse_cifar10(batch_bytes: bytes, name: str = "cifar10") -> RawDataset:
    if len(batch_bytes) == 0 or len(batch_bytes) % RECORD_BYTES != 0:
        raise FormatError(
            f"CIFAR-10 batch length {len(batch_bytes)} is not a positive multiple "
            f"of {RECORD_BYTES}"
        )
    n = len(batch_bytes) // RECORD_BYTES
    raw = np.frombuffer(batch_bytes, dtype=np.uint8).reshape(n, RECORD_BYTES)
    labels = raw[:, 0].astype(np.int64)
    if labels.max() > 9:
        raise FormatError(f"CIFAR-10 label byte {labels.max()} out of range [0, 9]")
    channels = raw[:, 1:].reshape(n, 3, SIDE, SIDE).astype(np.float64)
    gray = (
        0.299 * channels[:, 0] + 0.587 * channels[:, 1] + 0.114 * channels[:, 2]
    ) / 255.0
    return RawDataset(images=gray, labels=labels, name=name, n_classes=10)
