"""Shape-checked dense array operations used throughout the package."""

from __future__ import annotations

import numpy as np

from .exceptions import EmptyMaskError, ShapeMismatchError


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of two 2-D float64 arrays with explicit shape checking."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatchError(
            f"matmul requires 2-D operands, got shapes {a.shape} and {b.shape}"
        )
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(
            f"matmul inner dimensions differ: {a.shape} x {b.shape}"
        )
    return a @ b


def argmax_masked(values: np.ndarray, valid: np.ndarray) -> int:
    """Index of the maximum among entries where valid is True.

    Ties break to the lowest index, which keeps greedy policies deterministic.
    """
    values = np.asarray(values, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    if values.shape != valid.shape or values.ndim != 1:
        raise ShapeMismatchError(
            f"values {values.shape} and valid {valid.shape} must be equal-length vectors"
        )
    if not valid.any():
        raise EmptyMaskError("argmax_masked called with no valid entries")
    masked = np.where(valid, values, -np.inf)
    return int(np.argmax(masked))


def argmax_masked_rows(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Row-wise argmax_masked for a batch: values (B,A), valid (B,A) -> (B,)."""
    values = np.asarray(values, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    if values.shape != valid.shape or values.ndim != 2:
        raise ShapeMismatchError(
            f"values {values.shape} and valid {valid.shape} must be equal-shape matrices"
        )
    if not valid.any(axis=1).all():
        raise EmptyMaskError("argmax_masked_rows: some row has no valid entries")
    masked = np.where(valid, values, -np.inf)
    return np.argmax(masked, axis=1)
