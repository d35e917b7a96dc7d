"""Convolutional autoencoder for learning a compact latent feature space.

The encoder is convolutional (downsampling via stride), the decoder a
small dense net with a Sigmoid head so reconstructions stay in [0, 1].
The latent layer itself has no activation: downstream consumers see raw
encoder outputs.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .data.dataset import RawDataset
from .exceptions import ConfigError, DivergenceError
from .features import LatentFeatures
from .nn import Adam, Conv2D, Dense, Network, ReLU, Sigmoid, mse_loss
from .nn.serialize import load_network, save_network
from .rng import SeededRng
from .validation import check_image_batch

# fixed encoder/decoder family; the bottleneck width is the tunable part
_CONV1_CHANNELS = 8
_CONV2_CHANNELS = 16
_KERNEL = 3
_STRIDE = 2
_DECODER_HIDDEN = 256
_CHUNK = 512


def _conv_out(side: int) -> int:
    return (side - _KERNEL) // _STRIDE + 1


class ConvAutoencoder(TransformerMixin, BaseEstimator):
    """fit(images) learns the reconstruction; transform(images) yields latents."""

    def __init__(self, latent_dim: int = 128, epochs: int = 5, batch_size: int = 64,
                 lr: float = 1e-3, seed: int = 0):
        self.latent_dim = latent_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed

    def _build(self, height: int, width: int):
        rng = SeededRng(self.seed)
        h2 = _conv_out(_conv_out(height))
        w2 = _conv_out(_conv_out(width))
        if h2 <= 0 or w2 <= 0:
            raise ConfigError(f"images {height}x{width} too small for the encoder")
        flat = _CONV2_CHANNELS * h2 * w2
        encoder = [
            Conv2D(1, _CONV1_CHANNELS, _KERNEL, _STRIDE, rng),
            ReLU(),
            Conv2D(_CONV1_CHANNELS, _CONV2_CHANNELS, _KERNEL, _STRIDE, rng),
            ReLU(),
            Dense(flat, self.latent_dim, rng),
        ]
        decoder = [
            Dense(self.latent_dim, _DECODER_HIDDEN, rng),
            ReLU(),
            Dense(_DECODER_HIDDEN, height * width, rng),
            Sigmoid(),
        ]
        self.encoder_ = Network(encoder, input_shape=(None, 1, height, width))
        self.decoder_ = Network(decoder, input_shape=(None, self.latent_dim))
        self.network_ = Network(encoder + decoder)
        self.image_shape_ = (height, width)

    def fit(self, X, y=None):
        X = check_image_batch(X)
        n, height, width = X.shape
        if n < self.batch_size:
            raise ConfigError(
                f"need at least batch_size={self.batch_size} samples, got {n}"
            )
        self._build(height, width)
        optimizer = Adam(self.lr)
        shuffle_rng = SeededRng(self.seed + 1)
        curve = []
        for epoch in range(self.epochs):
            order = shuffle_rng.permutation(n)
            total = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                batch = X[idx][:, None, :, :]
                recon = self.network_.forward(batch)
                loss, grad = mse_loss(recon, X[idx].reshape(len(idx), -1))
                if not math.isfinite(loss):
                    raise DivergenceError(f"reconstruction loss diverged at epoch {epoch}")
                self.network_.backward(grad)
                optimizer.step(self.network_.param_list())
                total += loss * len(idx)
            curve.append(total / n)
        self.loss_curve_ = curve
        return self

    def _check_fitted_images(self, X) -> np.ndarray:
        if not hasattr(self, "network_"):
            raise NotFittedError("ConvAutoencoder is not fitted")
        X = check_image_batch(X)
        if self.image_shape_ is not None and X.shape[1:] != self.image_shape_:
            raise ValueError(
                f"images {X.shape[1:]} do not match the fitted shape {self.image_shape_}"
            )
        return X

    def transform(self, X) -> np.ndarray:
        X = self._check_fitted_images(X)
        out = [
            self.encoder_.forward(X[start : start + _CHUNK][:, None, :, :])
            for start in range(0, X.shape[0], _CHUNK)
        ]
        if not out:
            return np.empty((0, self.latent_dim))
        return np.concatenate(out, axis=0)

    def reconstruction_error(self, X) -> float:
        """Mean over samples of the mean squared pixel error."""
        X = self._check_fitted_images(X)
        n = X.shape[0]
        if n == 0:
            return 0.0
        total = 0.0
        for start in range(0, n, _CHUNK):
            batch = X[start : start + _CHUNK]
            recon = self.network_.forward(batch[:, None, :, :])
            diff = recon - batch.reshape(batch.shape[0], -1)
            total += float(np.sum(diff * diff))
        return total / (n * X.shape[1] * X.shape[2])

    def score(self, X, y=None) -> float:
        return -self.reconstruction_error(X)


def encode_dataset(model: ConvAutoencoder, ds: RawDataset) -> LatentFeatures:
    """Encode a dataset into the latent feature pool the agent consumes."""
    return LatentFeatures(
        features=model.transform(ds.images),
        labels=ds.labels,
        source_dataset=ds.name,
        n_classes=ds.n_classes,
    )


def save_autoencoder(path: str, model: ConvAutoencoder) -> None:
    if not hasattr(model, "network_"):
        raise NotFittedError("ConvAutoencoder is not fitted")
    save_network(path, model.network_)


def load_autoencoder(path: str) -> ConvAutoencoder:
    """Rebuild a fitted autoencoder from its parameter file.

    The encoder/decoder boundary is the first Dense layer: in this
    architecture family the encoder is conv layers followed by exactly one
    dense projection to the latent space.
    """
    net = load_network(path)
    split = next(
        (i for i, layer in enumerate(net.layers) if isinstance(layer, Dense)), None
    )
    if split is None or split + 1 >= len(net.layers):
        raise ConfigError(f"{path}: not an autoencoder parameter file")
    latent_layer = net.layers[split]
    model = ConvAutoencoder(latent_dim=latent_layer.out_dim)
    model.encoder_ = Network(net.layers[: split + 1])
    model.decoder_ = Network(net.layers[split + 1 :])
    model.network_ = net
    out_pixels = net.layers[-2].out_dim if isinstance(net.layers[-2], Dense) else None
    side = int(math.isqrt(out_pixels)) if out_pixels else 0
    model.image_shape_ = (side, side) if side * side == out_pixels else None
    model.loss_curve_ = []
    return model
