"""Q-learning core: Double DQN action evaluation with Retrace(lambda) targets.

Behavior is epsilon-greedy; every stored transition carries the exact
probability the behavior policy assigned to its action, which the
off-policy correction needs. Replay holds whole episodes because the
trace coefficients multiply along contiguous trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_X_y

from .env import CostlyFeatureEnv, RewardSpec
from .exceptions import ConfigError, DivergenceError, EmptyMaskError, InvalidActionError
from .features import LatentFeatures
from .linalg import argmax_masked, argmax_masked_rows
from .nn import Adam, Dense, Network, ReLU, huber_loss
from .rng import SeededRng
from .validation import check_feature_matrix

# fixed offsets carve per-purpose streams out of one seed
_SEED_INIT = 0
_SEED_ORDER = 1
_SEED_ACT = 2
_SEED_REPLAY = 3

METRICS_COLUMNS = (
    "episode",
    "epsilon",
    "loss",
    "eval_accuracy",
    "eval_avg_reward",
    "eval_avg_features",
)


@dataclass
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool
    behavior_prob: float
    valid_mask: np.ndarray
    next_valid_mask: np.ndarray


@dataclass
class EpisodeTrace:
    """One episode packed as arrays; the last transition is the only terminal one."""

    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray
    behavior_probs: np.ndarray
    valid_masks: np.ndarray
    next_valid_masks: np.ndarray

    @classmethod
    def from_transitions(cls, transitions: list[Transition]) -> "EpisodeTrace":
        if not transitions:
            raise ValueError("episode must contain at least one transition")
        trace = cls(
            obs=np.stack([t.obs for t in transitions]),
            actions=np.array([t.action for t in transitions], dtype=np.int64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_obs=np.stack([t.next_obs for t in transitions]),
            dones=np.array([t.done for t in transitions], dtype=bool),
            behavior_probs=np.array([t.behavior_prob for t in transitions], dtype=np.float64),
            valid_masks=np.stack([t.valid_mask for t in transitions]),
            next_valid_masks=np.stack([t.next_valid_mask for t in transitions]),
        )
        trace.validate()
        return trace

    def validate(self) -> None:
        if not self.dones[-1] or self.dones[:-1].any():
            raise ValueError("exactly the last transition must be terminal")
        if len(self) > 1 and not np.array_equal(self.next_obs[:-1], self.obs[1:]):
            raise ValueError("episode is not contiguous: next_obs[t] != obs[t+1]")
        if (self.behavior_probs <= 0).any():
            raise ValueError("corrupted transition: behavior_prob must be positive")

    def __len__(self) -> int:
        return self.actions.shape[0]


class ReplayBuffer:
    """Ring buffer of complete episodes with a seeded uniform sampler."""

    def __init__(self, capacity: int, seed: int):
        if capacity <= 0:
            raise ConfigError(f"replay capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._episodes: list[EpisodeTrace] = []
        self._next = 0
        self._rng = SeededRng(seed)

    def add(self, episode: EpisodeTrace) -> None:
        if len(self._episodes) < self.capacity:
            self._episodes.append(episode)
        else:
            self._episodes[self._next] = episode
            self._next = (self._next + 1) % self.capacity

    def __len__(self) -> int:
        return len(self._episodes)

    def sample(self, k: int) -> list[EpisodeTrace]:
        if not self._episodes:
            raise EmptyMaskError("cannot sample from an empty replay buffer")
        picks = self._rng.integers(len(self._episodes), k)
        return [self._episodes[i] for i in picks]


def build_qnet(m: int, n_classes: int, hidden: tuple[int, ...], seed: int) -> Network:
    """MLP from the 2m observation to one Q-value per action."""
    rng = SeededRng(seed)
    dims = [2 * m, *hidden]
    layers = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        layers += [Dense(d_in, d_out, rng), ReLU()]
    layers.append(Dense(dims[-1], m + n_classes, rng))
    return Network(layers, input_shape=(None, 2 * m))


def act(obs: np.ndarray, valid_mask: np.ndarray, qnet: Network, epsilon: float,
        rng: SeededRng):
    """Epsilon-greedy action plus its exact behavior probability.

    mu(a) = eps/|valid| + (1-eps) * 1[a == greedy], greedy ties to lowest index.
    """
    q = qnet.forward(obs[None, :])[0]
    greedy = argmax_masked(q, valid_mask)
    n_valid = int(np.count_nonzero(valid_mask))
    if rng.random() < epsilon:
        action = int(np.flatnonzero(valid_mask)[rng.randint(n_valid)])
    else:
        action = greedy
    mu = epsilon / n_valid + (1.0 - epsilon) * float(action == greedy)
    return action, mu


def sync_target(qnet_online: Network, qnet_target: Network) -> None:
    """Overwrite the target net's parameters with a deep copy of the online ones."""
    qnet_target.copy_params_from(qnet_online)


def _concat(episodes: list[EpisodeTrace]):
    lengths = [len(e) for e in episodes]
    return lengths, {
        "obs": np.concatenate([e.obs for e in episodes]),
        "actions": np.concatenate([e.actions for e in episodes]),
        "rewards": np.concatenate([e.rewards for e in episodes]),
        "next_obs": np.concatenate([e.next_obs for e in episodes]),
        "dones": np.concatenate([e.dones for e in episodes]),
        "mus": np.concatenate([e.behavior_probs for e in episodes]),
        "valid": np.concatenate([e.valid_masks for e in episodes]),
        "next_valid": np.concatenate([e.next_valid_masks for e in episodes]),
    }


def _batch_retrace_targets(episodes: list[EpisodeTrace], qnet_online: Network,
                           qnet_target: Network, gamma: float, lam: float):
    """Targets for every transition of every episode, concatenated.

    The evaluation policy pi is greedy w.r.t. the online net over valid
    actions; the bootstrap action comes from the online net but is valued
    by the target net. Per transition:
        delta_t = r_t + gamma*(1-done_t)*Q_tgt(s_{t+1}, a*_{t+1}) - Q_tgt(s_t, a_t)
        c_t     = lam * min(1, pi(a_t|s_t) / mu_t)        (pi is 0/1 for greedy)
        target_t = Q_tgt(s_t, a_t) + sum_{u>=t} gamma^{u-t} (prod_{s=t+1..u} c_s) delta_u
    computed with the usual backward recursion.
    """
    lengths, b = _concat(episodes)
    if (b["mus"] <= 0).any():
        raise ValueError("corrupted transition: behavior_prob must be positive")
    q_online_obs = qnet_online.forward(b["obs"])
    q_online_next = qnet_online.forward(b["next_obs"])
    q_target_obs = qnet_target.forward(b["obs"])
    q_target_next = qnet_target.forward(b["next_obs"])

    rows = np.arange(b["actions"].shape[0])
    q_taken = q_target_obs[rows, b["actions"]]
    boot_actions = argmax_masked_rows(q_online_next, b["next_valid"])
    boot = q_target_next[rows, boot_actions] * (1.0 - b["dones"].astype(np.float64))
    one_step = b["rewards"] + gamma * boot

    greedy_now = argmax_masked_rows(q_online_obs, b["valid"])
    pi = (b["actions"] == greedy_now).astype(np.float64)
    c = lam * np.minimum(1.0, pi / b["mus"])

    # target_t = one_step_t + gamma*c_{t+1}*S_{t+1} with S_t = target_t - Q_tgt(s_t,a_t);
    # grouping it this way makes lam=0 and terminal targets equal the one-step
    # Double-DQN targets bit-for-bit, not just numerically
    targets = np.empty_like(one_step)
    start = 0
    for n in lengths:
        acc = 0.0  # S_{t+1}, zero beyond the episode end
        for t in range(start + n - 1, start - 1, -1):
            cont = gamma * c[t + 1] * acc if t + 1 < start + n else 0.0
            targets[t] = one_step[t] + cont
            acc = (one_step[t] - q_taken[t]) + cont
        start += n
    return targets, b["obs"], b["actions"]


def retrace_targets(episode: EpisodeTrace, qnet_online: Network, qnet_target: Network,
                    gamma: float, lam: float) -> np.ndarray:
    """Per-transition regression targets for one episode."""
    targets, _, _ = _batch_retrace_targets([episode], qnet_online, qnet_target, gamma, lam)
    return targets


@dataclass
class AgentConfig:
    """All learning hyperparameters. epsilon decays linearly per episode."""

    gamma: float = 0.99
    lam: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_episodes: int = 0  # 0 -> half of train_episodes
    learning_rate: float = 5e-4
    batch_episodes: int = 32
    target_sync_period: int = 1000
    replay_capacity: int = 10000
    train_episodes: int = 20000
    hidden: tuple[int, ...] = (256, 256)
    eval_window: int = 0  # 0 -> train_episodes // 20
    seed: int = 0

    def __post_init__(self):
        for name in ("gamma", "lam", "epsilon_start", "epsilon_end"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        for name in ("learning_rate", "batch_episodes", "target_sync_period",
                     "replay_capacity"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.train_episodes < 0 or self.epsilon_decay_episodes < 0:
            raise ConfigError("episode counts must be nonnegative")
        if self.replay_capacity < self.batch_episodes:
            raise ConfigError(
                f"replay_capacity {self.replay_capacity} smaller than "
                f"batch_episodes {self.batch_episodes}"
            )
        self.hidden = tuple(self.hidden)

    def epsilon_for(self, episode: int) -> float:
        decay = self.epsilon_decay_episodes or max(1, self.train_episodes // 2)
        frac = min(1.0, episode / decay)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac


def train_step(buffer: ReplayBuffer, qnet_online: Network, qnet_target: Network,
               optimizer, cfg: AgentConfig) -> float:
    """One fitted-Q regression step on a sampled batch of episodes."""
    if len(buffer) < cfg.batch_episodes:
        raise ConfigError(
            f"buffer holds {len(buffer)} episodes, need {cfg.batch_episodes}"
        )
    episodes = buffer.sample(cfg.batch_episodes)
    targets, obs, actions = _batch_retrace_targets(
        episodes, qnet_online, qnet_target, cfg.gamma, cfg.lam
    )
    rows = np.arange(actions.shape[0])
    q_all = qnet_online.forward(obs)
    loss, dloss = huber_loss(q_all[rows, actions], targets)
    if not np.isfinite(loss):
        raise DivergenceError("non-finite training loss")
    grad = np.zeros_like(q_all)
    grad[rows, actions] = dloss
    qnet_online.backward(grad)
    optimizer.step(qnet_online.param_list())
    return loss


def rollout_episode(env: CostlyFeatureEnv, sample_index: int, qnet: Network,
                    epsilon: float, rng: SeededRng) -> EpisodeTrace:
    """Play one sample to termination under the epsilon-greedy policy."""
    state = env.reset(sample_index)
    transitions = []
    while True:
        obs = state.observation()
        valid = env.valid_actions(state)
        action, mu = act(obs, valid, qnet, epsilon, rng)
        next_state, reward, done = env.step(state, action)
        transitions.append(Transition(
            obs=obs,
            action=action,
            reward=reward,
            next_obs=next_state.observation(),
            done=done,
            behavior_prob=mu,
            valid_mask=valid,
            next_valid_mask=env.valid_actions(next_state),
        ))
        state = next_state
        if done:
            return EpisodeTrace.from_transitions(transitions)


@dataclass
class Metrics:
    accuracy: float
    avg_reward: float
    avg_features_used: float


def _rollout_batched(X: np.ndarray, n_classes: int, policy):
    """Run all samples in lockstep; returns (predicted class, acquisitions).

    policy(obs, valid, sample_indices) -> actions must return valid actions.
    """
    n, m = X.shape
    mask = np.zeros((n, m), dtype=bool)
    values = np.zeros((n, m), dtype=np.float64)
    pred = np.full(n, -1, dtype=np.int64)
    acquired = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    for _ in range(m + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        obs = np.concatenate([values[idx], mask[idx].astype(np.float64)], axis=1)
        valid = np.concatenate([~mask[idx], np.ones((idx.size, n_classes), dtype=bool)], axis=1)
        actions = np.asarray(policy(obs, valid, idx), dtype=np.int64)
        if actions.shape != (idx.size,):
            raise InvalidActionError(f"policy returned shape {actions.shape}")
        is_acquire = actions < m
        ai, f = idx[is_acquire], actions[is_acquire]
        if mask[ai, f].any():
            raise InvalidActionError("policy acquired an already-acquired feature")
        mask[ai, f] = True
        values[ai, f] = X[ai, f]
        acquired[ai] += 1
        ci = idx[~is_acquire]
        pred[ci] = actions[~is_acquire] - m
        active[ci] = False
    if active.any():
        raise InvalidActionError("policy failed to classify within m+1 steps")
    return pred, acquired


def greedy_policy(qnet: Network):
    def policy(obs, valid, _idx):
        return argmax_masked_rows(qnet.forward(obs), valid)

    return policy


def run_policy(features: LatentFeatures, rewards: RewardSpec, policy) -> Metrics:
    """Episode metrics for an arbitrary policy over every sample."""
    pred, acquired = _rollout_batched(features.features, features.n_classes, policy)
    correct = pred == features.labels
    returns = -rewards.feature_cost * acquired + np.where(
        correct, rewards.reward_correct, rewards.reward_wrong
    )
    return Metrics(
        accuracy=float(np.mean(correct)),
        avg_reward=float(np.mean(returns)),
        avg_features_used=float(np.mean(acquired)),
    )


def evaluate(qnet: Network, features: LatentFeatures, rewards: RewardSpec) -> Metrics:
    """Greedy (epsilon=0) evaluation over the given split."""
    return run_policy(features, rewards, greedy_policy(qnet))


def train(features: LatentFeatures, cfg: AgentConfig, rewards: RewardSpec,
          eval_features: LatentFeatures | None = None):
    """Full training loop; returns (online qnet, metrics rows).

    Samples are drawn cyclically with seeded reshuffles; each finished
    episode enters replay and triggers one train step once the buffer is
    warm; the target net syncs every target_sync_period train steps.
    """
    m, n_classes = features.latent_dim, features.n_classes
    env = CostlyFeatureEnv(features, rewards)
    qnet = build_qnet(m, n_classes, cfg.hidden, cfg.seed + _SEED_INIT)
    target = build_qnet(m, n_classes, cfg.hidden, cfg.seed + _SEED_INIT)
    sync_target(qnet, target)
    optimizer = Adam(cfg.learning_rate)
    buffer = ReplayBuffer(cfg.replay_capacity, cfg.seed + _SEED_REPLAY)
    order_rng = SeededRng(cfg.seed + _SEED_ORDER)
    act_rng = SeededRng(cfg.seed + _SEED_ACT)
    eval_feats = features if eval_features is None else eval_features
    window = cfg.eval_window or max(1, cfg.train_episodes // 20)

    metrics_rows = []
    window_losses = []
    order = order_rng.permutation(features.n_samples)
    pos = 0
    train_steps = 0
    for episode in range(cfg.train_episodes):
        if pos == len(order):
            order = order_rng.permutation(features.n_samples)
            pos = 0
        epsilon = cfg.epsilon_for(episode)
        trace = rollout_episode(env, int(order[pos]), qnet, epsilon, act_rng)
        pos += 1
        buffer.add(trace)
        if len(buffer) >= cfg.batch_episodes:
            window_losses.append(train_step(buffer, qnet, target, optimizer, cfg))
            train_steps += 1
            if train_steps % cfg.target_sync_period == 0:
                sync_target(qnet, target)
        if (episode + 1) % window == 0 or episode == cfg.train_episodes - 1:
            stats = evaluate(qnet, eval_feats, rewards)
            metrics_rows.append({
                "episode": episode + 1,
                "epsilon": epsilon,
                "loss": float(np.mean(window_losses)) if window_losses else float("nan"),
                "eval_accuracy": stats.accuracy,
                "eval_avg_reward": stats.avg_reward,
                "eval_avg_features": stats.avg_features_used,
            })
            window_losses = []
    return qnet, metrics_rows


def metrics_csv_text(rows: list[dict]) -> str:
    lines = [",".join(METRICS_COLUMNS)]
    for row in rows:
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                              for c in METRICS_COLUMNS))
    return "\n".join(lines) + "\n"


class RetraceDqnClassifier(ClassifierMixin, BaseEstimator):
    """Sequential feature-acquiring classifier trained by Q-learning.

    fit(X, y) treats each row as an episode over its columns; predict(X)
    replays the learned greedy policy, acquiring features until it
    classifies. eval_set, when given, is what the training-time metric
    windows are scored on.
    """

    def __init__(self, gamma: float = 0.99, lam: float = 1.0,
                 epsilon_start: float = 1.0, epsilon_end: float = 0.05,
                 epsilon_decay_episodes: int = 0, learning_rate: float = 5e-4,
                 batch_episodes: int = 32, target_sync_period: int = 1000,
                 replay_capacity: int = 10000, train_episodes: int = 20000,
                 hidden: tuple[int, ...] = (256, 256), eval_window: int = 0,
                 feature_cost: float = 0.005, reward_correct: float = 1.0,
                 reward_wrong: float = -1.0, seed: int = 0):
        self.gamma = gamma
        self.lam = lam
        self.epsilon_start = epsilon_start
        self.epsilon_end = epsilon_end
        self.epsilon_decay_episodes = epsilon_decay_episodes
        self.learning_rate = learning_rate
        self.batch_episodes = batch_episodes
        self.target_sync_period = target_sync_period
        self.replay_capacity = replay_capacity
        self.train_episodes = train_episodes
        self.hidden = hidden
        self.eval_window = eval_window
        self.feature_cost = feature_cost
        self.reward_correct = reward_correct
        self.reward_wrong = reward_wrong
        self.seed = seed

    def _agent_config(self) -> AgentConfig:
        return AgentConfig(
            gamma=self.gamma, lam=self.lam, epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            epsilon_decay_episodes=self.epsilon_decay_episodes,
            learning_rate=self.learning_rate, batch_episodes=self.batch_episodes,
            target_sync_period=self.target_sync_period,
            replay_capacity=self.replay_capacity, train_episodes=self.train_episodes,
            hidden=tuple(self.hidden), eval_window=self.eval_window, seed=self.seed,
        )

    def _reward_spec(self) -> RewardSpec:
        return RewardSpec(self.feature_cost, self.reward_correct, self.reward_wrong)

    def _encode_labels(self, y) -> np.ndarray:
        y = np.asarray(y)
        idx = np.searchsorted(self.classes_, y)
        clipped = np.minimum(idx, len(self.classes_) - 1)
        bad = (idx >= len(self.classes_)) | (self.classes_[clipped] != y)
        if bad.any():
            raise ValueError(f"labels {np.unique(y[bad])} not seen during fit")
        return idx

    def fit(self, X, y, eval_set=None):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        feats = LatentFeatures(X, y_idx, "memory", len(self.classes_))
        eval_feats = None
        if eval_set is not None:
            X_eval, y_eval = eval_set
            X_eval = check_feature_matrix(X_eval)
            eval_feats = LatentFeatures(
                X_eval, self._encode_labels(y_eval), "memory", len(self.classes_)
            )
        self.qnet_, self.metrics_log_ = train(
            feats, self._agent_config(), self._reward_spec(), eval_feats
        )
        return self

    def _check_fitted_X(self, X) -> np.ndarray:
        if not hasattr(self, "qnet_"):
            raise NotFittedError("RetraceDqnClassifier is not fitted")
        X = check_feature_matrix(X)
        expected = self.qnet_.layers[0].in_dim // 2
        if X.shape[1] != expected:
            raise ValueError(f"X has {X.shape[1]} features, expected {expected}")
        return X

    def predict(self, X):
        X = self._check_fitted_X(X)
        pred, _ = _rollout_batched(X, len(self.classes_), greedy_policy(self.qnet_))
        return self.classes_[pred]

    def feature_usage(self, X) -> np.ndarray:
        """Number of features the greedy policy acquires per sample."""
        X = self._check_fitted_X(X)
        _, acquired = _rollout_batched(X, len(self.classes_), greedy_policy(self.qnet_))
        return acquired

    def evaluate(self, X, y) -> Metrics:
        """Greedy-policy accuracy, average episode reward and feature usage."""
        X = self._check_fitted_X(X)
        feats = LatentFeatures(X, self._encode_labels(y), "memory", len(self.classes_))
        return evaluate(self.qnet_, feats, self._reward_spec())
