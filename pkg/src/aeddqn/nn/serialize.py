"""Binary save/load for network parameters.

File layout: magic "AEDQNET1" (8 bytes), then one block per layer:
a kind tag (1 byte), the kind's shape integers (u64 little-endian), and
the raw parameter data (float64 little-endian). Layer blocks repeat to
end of file. Kind tag 5 is reserved for the linear-SVM container.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from ..exceptions import FormatError
from ..fileio import atomic_write_bytes
from .layers import Conv2D, Dense, ReLU, Sigmoid
from .network import Network

MAGIC = b"AEDQNET1"

KIND_DENSE = 1
KIND_CONV2D = 2
KIND_RELU = 3
KIND_SIGMOID = 4
KIND_SVM_LINEAR = 5


def _pack_ints(*values: int) -> bytes:
    return struct.pack(f"<{len(values)}Q", *values)


def _pack_f64(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated network file while reading {what}")
    return data


def _read_ints(f, count: int, what: str) -> tuple:
    return struct.unpack(f"<{count}Q", _read_exact(f, 8 * count, what))


def _read_f64(f, count: int, what: str) -> np.ndarray:
    return np.frombuffer(_read_exact(f, 8 * count, what), dtype="<f8").astype(np.float64)


def _layer_bytes(layer) -> bytes:
    if isinstance(layer, Dense):
        return (
            bytes([KIND_DENSE])
            + _pack_ints(layer.in_dim, layer.out_dim)
            + _pack_f64(layer.w)
            + _pack_f64(layer.b)
        )
    if isinstance(layer, Conv2D):
        return (
            bytes([KIND_CONV2D])
            + _pack_ints(layer.in_channels, layer.out_channels, layer.kernel_size, layer.stride)
            + _pack_f64(layer.kernel)
            + _pack_f64(layer.b)
        )
    if isinstance(layer, ReLU):
        return bytes([KIND_RELU])
    if isinstance(layer, Sigmoid):
        return bytes([KIND_SIGMOID])
    raise FormatError(f"cannot serialize layer of type {type(layer).__name__}")


def network_to_bytes(net: Network) -> bytes:
    return MAGIC + b"".join(_layer_bytes(layer) for layer in net.layers)


def save_network(path: str, net: Network) -> None:
    atomic_write_bytes(path, network_to_bytes(net))


def _read_layer(f, tag: int):
    if tag == KIND_DENSE:
        in_dim, out_dim = _read_ints(f, 2, "Dense dims")
        layer = Dense(int(in_dim), int(out_dim))
        layer.w = _read_f64(f, in_dim * out_dim, "Dense weights").reshape(in_dim, out_dim)
        layer.b = _read_f64(f, out_dim, "Dense bias")
        return layer
    if tag == KIND_CONV2D:
        in_ch, out_ch, k, stride = _read_ints(f, 4, "Conv2D dims")
        layer = Conv2D(int(in_ch), int(out_ch), int(k), int(stride))
        layer.kernel = _read_f64(f, out_ch * in_ch * k * k, "Conv2D kernel").reshape(
            out_ch, in_ch, k, k
        )
        layer.b = _read_f64(f, out_ch, "Conv2D bias")
        return layer
    if tag == KIND_RELU:
        return ReLU()
    if tag == KIND_SIGMOID:
        return Sigmoid()
    raise FormatError(f"unknown layer kind tag {tag}")


def network_from_bytes(data: bytes) -> Network:
    f = io.BytesIO(data)
    if f.read(len(MAGIC)) != MAGIC:
        raise FormatError(f"bad magic; expected {MAGIC!r}")
    layers = []
    while True:
        tag_byte = f.read(1)
        if not tag_byte:
            break
        layers.append(_read_layer(f, tag_byte[0]))
    return Network(layers)


def load_network(path: str) -> Network:
    with open(path, "rb") as f:
        return network_from_bytes(f.read())


def svm_to_bytes(weights: np.ndarray, bias: np.ndarray, reg_lambda: float) -> bytes:
    """Linear SVM block (kind tag 5): ints (K, m), data W (K*m), b (K), lambda (1)."""
    k, m = weights.shape
    return (
        MAGIC
        + bytes([KIND_SVM_LINEAR])
        + _pack_ints(k, m)
        + _pack_f64(weights)
        + _pack_f64(bias)
        + _pack_f64(np.array([reg_lambda]))
    )


def svm_from_bytes(data: bytes):
    f = io.BytesIO(data)
    if f.read(len(MAGIC)) != MAGIC:
        raise FormatError(f"bad magic; expected {MAGIC!r}")
    tag = _read_exact(f, 1, "kind tag")[0]
    if tag != KIND_SVM_LINEAR:
        raise FormatError(f"expected SVM kind tag {KIND_SVM_LINEAR}, got {tag}")
    k, m = _read_ints(f, 2, "SVM dims")
    weights = _read_f64(f, k * m, "SVM weights").reshape(k, m)
    bias = _read_f64(f, k, "SVM bias")
    reg_lambda = float(_read_f64(f, 1, "SVM lambda")[0])
    return weights, bias, reg_lambda
