"""IDX binary format: the distribution format of MNIST and Fashion-MNIST.

Image files: u32 big-endian magic 2051, count, rows, cols, then count*rows*cols
unsigned pixel bytes. Label files: magic 2049, count, then count label bytes.
Parsing is strict: wrong magic, truncated buffers, or trailing bytes are all
rejected without reading out of bounds.
"""

from __future__ import annotations

import struct

import numpy as np

from ..exceptions import FormatError
from .dataset import RawDataset

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


def _read_header(buf: bytes, n_fields: int, what: str) -> tuple:
    need = 4 * n_fields
    if len(buf) < need:
        raise FormatError(f"{what}: buffer too short for header ({len(buf)} bytes)")
    return struct.unpack(f">{n_fields}I", buf[:need])


def parse_idx_images(buf: bytes) -> np.ndarray:
    """Pixels as (n, rows, cols) float64 in [0,1]; 255 maps to exactly 1.0."""
    magic, count, rows, cols = _read_header(buf, 4, "IDX image file")
    if magic != IMAGE_MAGIC:
        raise FormatError(f"IDX image file: bad magic {magic}, expected {IMAGE_MAGIC}")
    expected = 16 + count * rows * cols
    if len(buf) != expected:
        raise FormatError(
            f"IDX image file: length {len(buf)} does not match header "
            f"(count={count}, {rows}x{cols} -> {expected})"
        )
    pixels = np.frombuffer(buf, dtype=np.uint8, offset=16)
    return pixels.reshape(count, rows, cols).astype(np.float64) / 255.0


def parse_idx_labels(buf: bytes) -> np.ndarray:
    magic, count = _read_header(buf, 2, "IDX label file")
    if magic != LABEL_MAGIC:
        raise FormatError(f"IDX label file: bad magic {magic}, expected {LABEL_MAGIC}")
    if len(buf) != 8 + count:
        raise FormatError(
            f"IDX label file: length {len(buf)} does not match header count {count}"
        )
    return np.frombuffer(buf, dtype=np.uint8, offset=8).astype(np.int64)


def parse_idx(image_bytes: bytes, label_bytes: bytes, name: str = "mnist",
              n_classes: int = 10) -> RawDataset:
    """Parse paired image/label buffers into a dataset."""
    images = parse_idx_images(image_bytes)
    labels = parse_idx_labels(label_bytes)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"IDX pair mismatch: {images.shape[0]} images vs {labels.shape[0]} labels"
        )
    return RawDataset(images=images, labels=labels, name=name, n_classes=n_classes)


def write_idx_images(images: np.ndarray) -> bytes:
    """Inverse of parse_idx_images; expects uint8 pixels (n, rows, cols)."""
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    return struct.pack(">4I", IMAGE_MAGIC, n, rows, cols) + images.tobytes()


def write_idx_labels(labels: np.ndarray) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">2I", LABEL_MAGIC, labels.shape[0]) + labels.tobytes()
