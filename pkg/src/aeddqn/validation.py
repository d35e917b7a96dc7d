"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


def check_image_batch(X) -> np.ndarray:
    """Validate a (n, H, W) batch of grayscale images with pixels in [0, 1]."""
    X = check_array(X, allow_nd=True, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"expected images of shape (n, H, W), got {X.shape}")
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError("pixel values must be normalized to [0, 1]")
    return X


def check_feature_matrix(X) -> np.ndarray:
    """Validate a 2-D finite float64 feature matrix."""
    return check_array(X, dtype=np.float64, ensure_all_finite=True)
