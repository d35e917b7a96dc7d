"""Sequential decision process over a feature pool: one sample per episode.

At each step the agent either acquires one not-yet-acquired feature
(paying a uniform cost) or classifies the sample (ending the episode with
a reward for a correct guess and a penalty otherwise). The flat action
space encodes acquisitions as indices [0, m) and class guesses as
[m, m + K). The observation is [masked values || mask], length 2m, so the
agent can distinguish "value is zero" from "value unknown".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import InvalidActionError
from .features import LatentFeatures


@dataclass
class RewardSpec:
    """Uniform per-feature cost plus terminal classification rewards."""

    feature_cost: float = 0.005
    reward_correct: float = 1.0
    reward_wrong: float = -1.0

    def __post_init__(self):
        if self.feature_cost < 0:
            raise ValueError(f"feature_cost must be nonnegative, got {self.feature_cost}")
        if self.reward_correct <= 0:
            raise ValueError(f"reward_correct must be positive, got {self.reward_correct}")
        if self.reward_wrong >= 0:
            raise ValueError(f"reward_wrong must be negative, got {self.reward_wrong}")


@dataclass
class EnvState:
    """Acquisition mask plus masked feature values for one episode."""

    mask: np.ndarray
    values: np.ndarray
    sample_index: int
    done: bool = field(default=False)

    def observation(self) -> np.ndarray:
        """Length-2m vector [values || mask]; unacquired values stay zero."""
        return np.concatenate([self.values, self.mask.astype(np.float64)])


class CostlyFeatureEnv:
    """Episodic environment over a read-only feature pool.

    Instances are cheap; one per training loop. step() is pure: it returns
    a fresh state and never mutates its argument, so replaying an action
    sequence reproduces rewards exactly.
    """

    def __init__(self, features: LatentFeatures, rewards: RewardSpec):
        self.features = features
        self.rewards = rewards
        self.m = features.latent_dim
        self.n_classes = features.n_classes
        self.n_actions = self.m + self.n_classes

    def reset(self, sample_index: int) -> EnvState:
        if not 0 <= sample_index < self.features.n_samples:
            raise IndexError(
                f"sample_index {sample_index} out of range [0, {self.features.n_samples})"
            )
        return EnvState(
            mask=np.zeros(self.m, dtype=bool),
            values=np.zeros(self.m, dtype=np.float64),
            sample_index=sample_index,
        )

    def valid_actions(self, state: EnvState) -> np.ndarray:
        """Acquire(f) valid iff f unacquired; all K classify actions always valid."""
        valid = np.ones(self.n_actions, dtype=bool)
        valid[: self.m] = ~state.mask
        return valid

    def step(self, state: EnvState, action: int):
        """Apply one action; returns (next_state, reward, done)."""
        if state.done:
            raise InvalidActionError("episode already ended; reset the environment")
        if not 0 <= action < self.n_actions:
            raise InvalidActionError(
                f"action {action} out of range [0, {self.n_actions})"
            )
        if action < self.m:
            if state.mask[action]:
                raise InvalidActionError(f"feature {action} already acquired")
            mask = state.mask.copy()
            values = state.values.copy()
            mask[action] = True
            values[action] = self.features.features[state.sample_index, action]
            next_state = replace(state, mask=mask, values=values)
            return next_state, -self.rewards.feature_cost, False
        guess = action - self.m
        label = int(self.features.labels[state.sample_index])
        reward = self.rewards.reward_correct if guess == label else self.rewards.reward_wrong
        return replace(state, done=True), reward, True
