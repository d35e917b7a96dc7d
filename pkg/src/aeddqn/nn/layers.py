"""Feedforward layers with explicit forward/backward passes.

Layer set: Dense, Conv2D (valid padding, downsampling via stride), ReLU,
Sigmoid. All math is float64; the batch dimension is always the leading
axis. Every layer caches what its backward pass needs, so backward must
follow a forward on the same batch.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigError, ShapeMismatchError, StateError
from ..rng import SeededRng


def glorot_limit(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


class Layer:
    """Base layer: forward/backward plus static shape inference."""

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def output_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError

    def param_list(self):
        """(name, param, grad) triples; grads are valid after a backward pass."""
        return []

    def _require_forward(self, cache):
        if cache is None:
            raise StateError(f"{type(self).__name__}.backward called before forward")


class Dense(Layer):
    """Affine map y = x W + b. Non-2D inputs are flattened per sample."""

    def __init__(self, in_dim: int, out_dim: int, rng: SeededRng | None = None):
        if in_dim <= 0 or out_dim <= 0:
            raise ConfigError(f"Dense dims must be positive, got {in_dim}->{out_dim}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        if rng is None:
            self.w = np.zeros((in_dim, out_dim))
        else:
            limit = glorot_limit(in_dim, out_dim)
            self.w = rng.uniform_range(-limit, limit, in_dim * out_dim).reshape(in_dim, out_dim)
        self.b = np.zeros(out_dim)
        self.grad_w = None
        self.grad_b = None
        self._cache = None

    def output_shape(self, in_shape):
        flat = int(np.prod(in_shape[1:]))
        if flat != self.in_dim:
            raise ShapeMismatchError(
                f"Dense expects {self.in_dim} input features, got shape {in_shape}"
            )
        return (in_shape[0], self.out_dim)

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        self.output_shape(x.shape)
        in_shape = x.shape
        x2 = x.reshape(in_shape[0], self.in_dim)
        self._cache = (x2, in_shape)
        return x2 @ self.w + self.b

    def backward(self, grad_out):
        self._require_forward(self._cache)
        x2, in_shape = self._cache
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != (in_shape[0], self.out_dim):
            raise ShapeMismatchError(
                f"Dense backward got grad {grad_out.shape}, expected {(in_shape[0], self.out_dim)}"
            )
        self.grad_w = x2.T @ grad_out
        self.grad_b = grad_out.sum(axis=0)
        return (grad_out @ self.w.T).reshape(in_shape)

    def param_list(self):
        return [("W", self.w, self.grad_w), ("b", self.b, self.grad_b)]


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """Patch matrix of shape (B*oh*ow, C*kh*kw) for a valid convolution."""
    b, c, h, w = x.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    cols = np.empty((b, c, kh, kw, oh, ow), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j, :, :] = x[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
    return cols.transpose(0, 4, 5, 1, 2, 3).reshape(b * oh * ow, c * kh * kw)


def _col2im(cols: np.ndarray, x_shape: tuple, kh: int, kw: int, stride: int) -> np.ndarray:
    """Adjoint of _im2col; overlapping windows accumulate."""
    b, c, h, w = x_shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    cols = cols.reshape(b, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
    x = np.zeros(x_shape, dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            x[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += cols[:, :, i, j, :, :]
    return x


class Conv2D(Layer):
    """2-D convolution, valid padding, via im2col. Input is (B, C, H, W)."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        stride: int = 1,
        rng: SeededRng | None = None,
    ):
        if kernel_size <= 0 or stride <= 0:
            raise ConfigError(
                f"Conv2D kernel_size/stride must be positive, got {kernel_size}/{stride}"
            )
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        n_k = in_channels * kernel_size * kernel_size
        if rng is None:
            self.kernel = np.zeros((out_channels, in_channels, kernel_size, kernel_size))
        else:
            limit = glorot_limit(n_k, out_channels * kernel_size * kernel_size)
            self.kernel = rng.uniform_range(-limit, limit, out_channels * n_k).reshape(
                out_channels, in_channels, kernel_size, kernel_size
            )
        self.b = np.zeros(out_channels)
        self.grad_kernel = None
        self.grad_b = None
        self._cache = None

    def output_shape(self, in_shape):
        if len(in_shape) != 4:
            raise ShapeMismatchError(f"Conv2D expects (B, C, H, W), got {in_shape}")
        b, c, h, w = in_shape
        if c != self.in_channels:
            raise ShapeMismatchError(
                f"Conv2D expects {self.in_channels} input channels, got {c}"
            )
        k = self.kernel_size
        if h < k or w < k:
            raise ConfigError(f"Conv2D kernel {k}x{k} exceeds input {h}x{w}")
        oh = (h - k) // self.stride + 1
        ow = (w - k) // self.stride + 1
        return (b, self.out_channels, oh, ow)

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        out_shape = self.output_shape(x.shape)
        k, s = self.kernel_size, self.stride
        cols = _im2col(x, k, k, s)
        wmat = self.kernel.reshape(self.out_channels, -1).T
        out = cols @ wmat + self.b
        self._cache = (cols, x.shape)
        b, f, oh, ow = out_shape
        return out.reshape(b, oh, ow, f).transpose(0, 3, 1, 2)

    def backward(self, grad_out):
        self._require_forward(self._cache)
        cols, x_shape = self._cache
        out_shape = self.output_shape(x_shape)
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != out_shape:
            raise ShapeMismatchError(
                f"Conv2D backward got grad {grad_out.shape}, expected {out_shape}"
            )
        f = self.out_channels
        gmat = grad_out.transpose(0, 2, 3, 1).reshape(-1, f)
        self.grad_b = gmat.sum(axis=0)
        self.grad_kernel = (cols.T @ gmat).T.reshape(self.kernel.shape)
        wmat = self.kernel.reshape(f, -1).T
        gcols = gmat @ wmat.T
        k, s = self.kernel_size, self.stride
        return _col2im(gcols, x_shape, k, k, s)

    def param_list(self):
        return [("K", self.kernel, self.grad_kernel), ("b", self.b, self.grad_b)]


class ReLU(Layer):
    def __init__(self):
        self._cache = None

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, grad_out):
        self._require_forward(self._cache)
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != self._cache.shape:
            raise ShapeMismatchError(
                f"ReLU backward got grad {grad_out.shape}, expected {self._cache.shape}"
            )
        return np.where(self._cache, grad_out, 0.0)


class Sigmoid(Layer):
    def __init__(self):
        self._cache = None

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        # the two-branch form avoids overflow in exp for large |x|
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        self._cache = out
        return out

    def backward(self, grad_out):
        self._require_forward(self._cache)
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != self._cache.shape:
            raise ShapeMismatchError(
                f"Sigmoid backward got grad {grad_out.shape}, expected {self._cache.shape}"
            )
        s = self._cache
        return grad_out * s * (1.0 - s)
