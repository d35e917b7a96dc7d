"""Gradient-descent optimizers over Network parameter lists."""

from __future__ import annotations

import numpy as np

from ..exceptions import DivergenceError, StateError


def _check_grad(name: str, grad):
    if grad is None:
        raise StateError(f"no gradient for parameter {name}; run backward first")
    if not np.isfinite(grad).all():
        raise DivergenceError(f"non-finite gradient for parameter {name}")


class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, param_items) -> None:
        for name, p, g in param_items:
            _check_grad(name, g)
            p -= self.lr * g


class Adam:
    """Adam with bias-corrected moments; state is keyed by parameter name."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, param_items) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for name, p, g in param_items:
            _check_grad(name, g)
            m = self._m.setdefault(name, np.zeros_like(p))
            v = self._v.setdefault(name, np.zeros_like(p))
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)
