"""Feature cache file: encoded datasets stored between pipeline stages.

Layout: magic "AEDQFTR1" (8 bytes), version byte, n (u64 LE), m (u64 LE),
class count K (u32 LE), n*m float32 LE feature values (row-major), then
n label bytes (u8). Values are quantized to 32-bit on write; the
write-read round trip is otherwise exact.
"""

from __future__ import annotations

import struct

import numpy as np

from ..exceptions import FormatError
from ..features import LatentFeatures
from ..fileio import atomic_write_bytes

MAGIC = b"AEDQFTR1"
VERSION = 1
_HEADER = struct.Struct("<8sB QQ I")


def feature_cache_to_bytes(feats: LatentFeatures) -> bytes:
    n, m = feats.features.shape
    if feats.n_classes > 256 or (feats.labels.size and feats.labels.max() > 255):
        raise FormatError("feature cache stores labels as u8; class index exceeds 255")
    header = _HEADER.pack(MAGIC, VERSION, n, m, feats.n_classes)
    quantized = np.ascontiguousarray(feats.features, dtype="<f4")
    if not np.isfinite(quantized).all():
        raise FormatError("feature values overflow 32-bit storage")
    labels = feats.labels.astype(np.uint8).tobytes()
    return header + quantized.tobytes() + labels


def feature_cache_from_bytes(buf: bytes, source_dataset: str = "") -> LatentFeatures:
    if len(buf) < _HEADER.size:
        raise FormatError(f"feature cache: buffer too short for header ({len(buf)} bytes)")
    magic, version, n, m, n_classes = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"feature cache: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"feature cache: unsupported version {version}")
    expected = _HEADER.size + n * m * 4 + n
    if len(buf) != expected:
        raise FormatError(
            f"feature cache: length {len(buf)} does not match header "
            f"(n={n}, m={m} -> {expected})"
        )
    values = np.frombuffer(buf, dtype="<f4", count=n * m, offset=_HEADER.size)
    labels = np.frombuffer(buf, dtype=np.uint8, count=n, offset=_HEADER.size + n * m * 4)
    return LatentFeatures(
        features=values.reshape(n, m).astype(np.float64),
        labels=labels.astype(np.int64),
        source_dataset=source_dataset,
        n_classes=int(n_classes),
    )


def write_feature_cache(path: str, feats: LatentFeatures) -> None:
    atomic_write_bytes(path, feature_cache_to_bytes(feats))


def read_feature_cache(path: str, source_dataset: str = "") -> LatentFeatures:
    with open(path, "rb") as f:
        return feature_cache_from_bytes(f.read(), source_dataset=source_dataset)
