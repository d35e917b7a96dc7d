import numpy as np
import pytest

from aeddqn.env import CostlyFeatureEnv, EnvState, RewardSpec
from aeddqn.exceptions import InvalidActionError
from aeddqn.features import LatentFeatures
from aeddqn.rng import SeededRng


def _env(n=20, m=6, n_classes=4, seed=1, **reward_kwargs):
    rng = SeededRng(seed)
    feats = LatentFeatures(
        features=rng.uniform(n * m).reshape(n, m) * 2 - 1,
        labels=rng.integers(n_classes, n),
        source_dataset="toy",
        n_classes=n_classes,
    )
    return CostlyFeatureEnv(feats, RewardSpec(**reward_kwargs))


def test_reset_gives_all_zero_observation():
    env = _env()
    state = env.reset(3)
    obs = state.observation()
    assert obs.shape == (2 * env.m,)
    assert np.array_equal(obs, np.zeros(2 * env.m))
    assert not state.done


def test_reset_out_of_range():
    env = _env(n=5)
    with pytest.raises(IndexError):
        env.reset(5)
    with pytest.raises(IndexError):
        env.reset(-1)


def test_reset_is_stateless_across_episodes():
    env = _env()
    state = env.reset(2)
    state, _, _ = env.step(state, 0)  # abandon mid-episode
    fresh = env.reset(2)
    assert np.array_equal(fresh.observation(), np.zeros(2 * env.m))
    assert np.array_equal(fresh.observation(), env.reset(2).observation())


def test_acquire_reveals_value_and_charges_cost():
    env = _env(feature_cost=0.005)
    state = env.reset(0)
    next_state, reward, done = env.step(state, 3)
    assert reward == -0.005
    assert done is False
    assert next_state.mask[3]
    assert next_state.values[3] == env.features.features[0, 3]
    # original state untouched: step is pure
    assert not state.mask.any()


def test_classify_rewards():
    env = _env(reward_correct=1.0, reward_wrong=-1.0)
    label = int(env.features.labels[4])
    state = env.reset(4)
    _, reward, done = env.step(state, env.m + label)
    assert (reward, done) == (1.0, True)
    wrong = (label + 1) % env.n_classes
    _, reward, done = env.step(env.reset(4), env.m + wrong)
    assert (reward, done) == (-1.0, True)


def test_reacquisition_rejected():
    env = _env()
    state = env.reset(0)
    state, _, _ = env.step(state, 2)
    with pytest.raises(InvalidActionError, match="already acquired"):
        env.step(state, 2)


def test_step_after_done_rejected():
    env = _env()
    state, _, _ = env.step(env.reset(0), env.m)  # classify
    with pytest.raises(InvalidActionError, match="ended"):
        env.step(state, 0)


def test_action_out_of_range():
    env = _env()
    with pytest.raises(InvalidActionError):
        env.step(env.reset(0), env.n_actions)


def test_valid_actions_fresh_and_forced():
    env = _env(m=4, n_classes=3)
    state = env.reset(0)
    assert env.valid_actions(state).sum() == 7
    for f in range(4):
        state, _, _ = env.step(state, f)
    valid = env.valid_actions(state)
    assert valid.sum() == 3
    assert not valid[:4].any()


def test_valid_actions_after_one_acquire():
    env = _env()
    state, _, _ = env.step(env.reset(0), 2)
    valid = env.valid_actions(state)
    assert not valid[2]
    assert valid.sum() == env.n_actions - 1


def test_random_episode_accounting_identity():
    env = _env(n=50, m=8, feature_cost=0.013, reward_correct=2.0, reward_wrong=-0.5)
    rng = SeededRng(99)
    for episode in range(500):
        state = env.reset(rng.randint(50))
        ret, steps, acquisitions = 0.0, 0, 0
        terminal = 0.0
        while True:
            valid = np.flatnonzero(env.valid_actions(state))
            action = int(valid[rng.randint(len(valid))])
            state, reward, done = env.step(state, action)
            ret += reward
            steps += 1
            if action < env.m:
                acquisitions += 1
            if done:
                terminal = reward
                break
            # masked observation never leaks unacquired values
            obs = state.observation()
            unacquired = ~state.mask
            assert np.array_equal(obs[: env.m][unacquired], np.zeros(unacquired.sum()))
        assert steps <= env.m + 1
        assert abs(ret - (-0.013 * acquisitions + terminal)) < 1e-12


def test_replaying_actions_reproduces_rewards():
    env = _env(n=10, m=5)
    rng = SeededRng(3)
    state = env.reset(7)
    actions, rewards = [], []
    while True:
        valid = np.flatnonzero(env.valid_actions(state))
        action = int(valid[rng.randint(len(valid))])
        state, reward, done = env.step(state, action)
        actions.append(action)
        rewards.append(reward)
        if done:
            break
    state = env.reset(7)
    for action, expected in zip(actions, rewards):
        state, reward, _ = env.step(state, action)
        assert reward == expected


def test_reward_spec_validation():
    with pytest.raises(ValueError):
        RewardSpec(feature_cost=-0.1)
    with pytest.raises(ValueError):
        RewardSpec(reward_correct=0.0)
    with pytest.raises(ValueError):
        RewardSpec(reward_wrong=0.5)


def test_observation_layout_values_then_mask():
    env = _env()
    state, _, _ = env.step(env.reset(1), 0)
    obs = state.observation()
    assert obs[0] == env.features.features[1, 0]
    assert obs[env.m] == 1.0
    assert obs[env.m + 1 :].sum() == 0.0
