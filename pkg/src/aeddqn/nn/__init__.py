from .layers import Conv2D, Dense, Layer, ReLU, Sigmoid
from .losses import huber_loss, mse_loss
from .network import Network
from .optim import SGD, Adam
from .serialize import load_network, save_network

__all__ = [
    "Adam",
    "Conv2D",
    "Dense",
    "Layer",
    "Network",
    "ReLU",
    "SGD",
    "Sigmoid",
    "huber_loss",
    "load_network",
    "mse_loss",
    "save_network",
]
