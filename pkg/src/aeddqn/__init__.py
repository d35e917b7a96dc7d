"""Costly-feature image classification.

A convolutional autoencoder compresses images into a small latent
feature pool; a Q-learning agent (Double DQN action evaluation with
Retrace(lambda) off-policy targets) then learns, per sample, which of
those features to buy before committing to a class. A Pegasos linear SVM
on the same features serves as the baseline.
"""

from .agent import (
    AgentConfig,
    Metrics,
    RetraceDqnClassifier,
    evaluate,
    retrace_targets,
    train,
)
from .autoencoder import ConvAutoencoder, encode_dataset, load_autoencoder, save_autoencoder
from .env import CostlyFeatureEnv, EnvState, RewardSpec
from .features import LatentFeatures
from .rng import SeededRng
from .svm import PegasosSvm

__all__ = [
    "AgentConfig",
    "ConvAutoencoder",
    "CostlyFeatureEnv",
    "EnvState",
    "LatentFeatures",
    "Metrics",
    "PegasosSvm",
    "RetraceDqnClassifier",
    "RewardSpec",
    "SeededRng",
    "encode_dataset",
    "evaluate",
    "load_autoencoder",
    "retrace_targets",
    "save_autoencoder",
    "train",
]

__version__ = "0.1.0"
