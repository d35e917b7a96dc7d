"""Linear multiclass SVM baseline trained by stochastic subgradient descent.

One-vs-rest hinge loss with L2 regularization; the learning rate is the
classic 1/(lambda*t) schedule. All K binary problems share the same
seeded sample order, so one pass over the data updates every row of the
weight matrix at once.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_X_y

from .features import LatentFeatures
from .nn.serialize import svm_from_bytes, svm_to_bytes
from .fileio import atomic_write_bytes
from .rng import SeededRng
from .validation import check_feature_matrix


def _pegasos_ovr(X: np.ndarray, y: np.ndarray, n_classes: int, reg_lambda: float,
                 epochs: int, seed: int):
    # the bias is trained as an appended constant-1 feature, so it shares the
    # regularized decay; otherwise the huge first steps (eta_1 = 1/lambda)
    # leave a bias offset that never shrinks
    n, m = X.shape
    weights = np.zeros((n_classes, m))
    bias = np.zeros(n_classes)
    signs = np.where(y[None, :] == np.arange(n_classes)[:, None], 1.0, -1.0)  # (K, n)
    rng = SeededRng(seed)
    objective_curve = []
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (reg_lambda * t)
            x = X[i]
            margin = signs[:, i] * (weights @ x + bias)
            hit = margin < 1.0  # violated rows get the hinge subgradient
            decay = 1.0 - eta * reg_lambda
            weights *= decay
            bias *= decay
            if hit.any():
                coeff = eta * signs[hit, i]
                weights[hit] += coeff[:, None] * x
                bias[hit] += coeff
        objective_curve.append(_objective(X, signs, weights, bias, reg_lambda))
    return weights, bias, objective_curve


def _objective(X, signs, weights, bias, reg_lambda) -> float:
    margins = signs * (weights @ X.T + bias[:, None])
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    reg = 0.5 * reg_lambda * (np.sum(weights * weights) + np.sum(bias * bias))
    return float(reg + hinge)


def decision_scores(weights: np.ndarray, bias: np.ndarray, X: np.ndarray) -> np.ndarray:
    return X @ weights.T + bias


class PegasosSvm(ClassifierMixin, BaseEstimator):
    """fit(X, y) / predict(X); prediction is argmax of the linear scores
    (ties to the lowest class index)."""

    def __init__(self, reg_lambda: float = 1e-4, epochs: int = 20, seed: int = 0):
        self.reg_lambda = reg_lambda
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        if self.reg_lambda <= 0:
            raise ValueError(f"reg_lambda must be positive, got {self.reg_lambda}")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.coef_, self.intercept_, self.objective_curve_ = _pegasos_ovr(
            X, y_idx, len(self.classes_), self.reg_lambda, self.epochs, self.seed
        )
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise NotFittedError("PegasosSvm is not fitted")
        X = check_feature_matrix(X)
        if X.shape[1] != self.coef_.shape[1]:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.coef_.shape[1]}"
            )
        return decision_scores(self.coef_, self.intercept_, X)

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def save(self, path: str) -> None:
        if not hasattr(self, "coef_"):
            raise NotFittedError("PegasosSvm is not fitted")
        atomic_write_bytes(path, svm_to_bytes(self.coef_, self.intercept_, self.reg_lambda))

    @classmethod
    def load(cls, path: str) -> "PegasosSvm":
        with open(path, "rb") as f:
            weights, bias, reg_lambda = svm_from_bytes(f.read())
        model = cls(reg_lambda=reg_lambda)
        model.coef_ = weights
        model.intercept_ = bias
        model.classes_ = np.arange(weights.shape[0])
        model.objective_curve_ = []
        return model


def train_svm_baseline(features: LatentFeatures, reg_lambda: float = 1e-4,
                       epochs: int = 20, seed: int = 0) -> PegasosSvm:
    if features.n_samples == 0:
        raise ValueError("cannot train on an empty feature set")
    model = PegasosSvm(reg_lambda=reg_lambda, epochs=epochs, seed=seed)
    model.fit(features.features, features.labels)
    return model


def baseline_accuracy(model: PegasosSvm, features: LatentFeatures) -> float:
    return float(np.mean(model.predict(features.features) == features.labels))
