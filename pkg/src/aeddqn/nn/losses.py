"""Scalar losses with analytic gradients w.r.t. the prediction.

Both losses average over every element, so the returned gradient feeds
straight into Network.backward as the upstream gradient.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ShapeMismatchError


def _check_pair(pred: np.ndarray, target: np.ndarray):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatchError(
            f"loss shapes differ: pred {pred.shape} vs target {target.shape}"
        )
    return pred, target


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error; returns (value, grad_wrt_pred)."""
    pred, target = _check_pair(pred, target)
    diff = pred - target
    n = diff.size
    value = float(np.mean(diff * diff))
    grad = (2.0 / n) * diff
    return value, grad


def huber_loss(pred: np.ndarray, target: np.ndarray, delta: float = 1.0):
    """Huber loss: quadratic within delta, linear outside; returns (value, grad)."""
    pred, target = _check_pair(pred, target)
    diff = pred - target
    adiff = np.abs(diff)
    quad = adiff <= delta
    elems = np.where(quad, 0.5 * diff * diff, delta * (adiff - 0.5 * delta))
    n = diff.size
    value = float(np.mean(elems))
    grad = np.where(quad, diff, delta * np.sign(diff)) / n
    return value, grad
