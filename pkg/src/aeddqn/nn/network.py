"""Sequential container over layers with reverse-mode backprop."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigError, ShapeMismatchError, StateError
from .layers import Layer


class Network:
    """An ordered stack of layers trained by the owning loop (not thread-safe).

    If input_shape is given (batch dim as None or any int), adjacent layer
    compatibility is validated at construction.
    """

    def __init__(self, layers: list[Layer], input_shape: tuple | None = None):
        self.layers = list(layers)
        self._forward_done = False
        if input_shape is not None:
            shape = (1,) + tuple(input_shape[1:])
            for i, layer in enumerate(self.layers):
                try:
                    shape = layer.output_shape(shape)
                except (ShapeMismatchError, ConfigError) as e:
                    raise type(e)(f"layer {i} ({type(layer).__name__}): {e}") from None

    def forward(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(x, dtype=np.float64)
        for i, layer in enumerate(self.layers):
            try:
                out = layer.forward(out)
            except (ShapeMismatchError, ConfigError) as e:
                raise type(e)(f"layer {i} ({type(layer).__name__}): {e}") from None
        self._forward_done = True
        return out

    def backward(self, upstream_grad: np.ndarray) -> np.ndarray:
        """Backprop the upstream gradient; returns the gradient w.r.t. the input."""
        if not self._forward_done:
            raise StateError("Network.backward called before forward")
        grad = np.asarray(upstream_grad, dtype=np.float64)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def param_list(self):
        items = []
        for i, layer in enumerate(self.layers):
            for name, p, g in layer.param_list():
                items.append((f"layer{i}.{name}", p, g))
        return items

    def copy_params_from(self, other: "Network") -> None:
        """Overwrite this network's parameters with a deep copy of other's."""
        mine = self.param_list()
        theirs = other.param_list()
        if len(mine) != len(theirs):
            raise ShapeMismatchError(
                f"parameter count mismatch: {len(mine)} vs {len(theirs)}"
            )
        for (name_a, p_a, _), (name_b, p_b, _) in zip(mine, theirs):
            if p_a.shape != p_b.shape:
                raise ShapeMismatchError(
                    f"parameter shape mismatch at {name_a}: {p_a.shape} vs {p_b.shape}"
                )
            np.copyto(p_a, p_b)
