"""Command-line pipeline: train-ae, encode, train-agent, eval, baseline.

Every command reads one flat config file, derives all randomness from the
single `seed` key (optionally overridden by --seed), writes its artifacts
atomically under --out-dir, and finishes by writing a JSON run manifest
listing every produced file.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from .agent import AgentConfig, evaluate, metrics_csv_text, train
from .autoencoder import ConvAutoencoder, encode_dataset, load_autoencoder, save_autoencoder
from .data.cache import read_feature_cache, write_feature_cache
from .data.cifar import parse_cifar10
from .data.config import ExperimentConfig
from .data.dataset import RawDataset
from .data.idx import parse_idx
from .data.split import subset, train_test_split
from .env import RewardSpec
from .exceptions import ConfigError
from .fileio import atomic_write_text
from .nn.serialize import load_network, save_network
from .svm import PegasosSvm, baseline_accuracy

DEFAULTS = {
    "dataset.name": "mnist",
    "dataset.train_path": "",
    "dataset.test_path": "",
    "dataset.subset_n": 0,
    "ae.latent_dim": 128,
    "ae.epochs": 5,
    "ae.lr": 1e-3,
    "ae.batch": 64,
    "env.feature_cost": 0.005,
    "env.reward_correct": 1.0,
    "env.reward_wrong": -1.0,
    "agent.gamma": 0.99,
    "agent.lambda": 1.0,
    "agent.epsilon_start": 1.0,
    "agent.epsilon_end": 0.05,
    "agent.epsilon_decay": 0,
    "agent.train_episodes": 20000,
    "agent.replay_capacity": 10000,
    "agent.batch_episodes": 32,
    "agent.sync_period": 1000,
    "agent.lr": 5e-4,
    "agent.hidden": (256, 256),
    "seed": 0,
}
KNOWN_KEYS = set(DEFAULTS)

# per-purpose seed offsets so one config seed drives the whole pipeline
_SEED_AE = 11
_SEED_AGENT = 13
_SEED_SVM = 17
_SEED_SPLIT = 19
_SEED_SUBSET = 23

_FALLBACK_TEST_FRACTION = 0.2  # used only when dataset.test_path is empty

AE_MODEL = "ae_model.net"
AE_LOSS = "ae_loss.csv"
TRAIN_CACHE = "features_train.bin"
TEST_CACHE = "features_test.bin"
AGENT_MODEL = "agent_model.net"
AGENT_METRICS = "train_metrics.csv"
EVAL_SUMMARY = "eval_summary.csv"
BASELINE_CSV = "baseline.csv"
SVM_MODEL = "svm_model.net"

_IDX_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def resolve_config(path: str, seed_override: int | None) -> dict:
    """Merge file values over defaults into one typed key->value snapshot."""
    cfg = ExperimentConfig.load(path, known_keys=KNOWN_KEYS)
    resolved = {}
    for key, default in DEFAULTS.items():
        if isinstance(default, bool):
            resolved[key] = cfg.get_bool(key, default)
        elif isinstance(default, int):
            resolved[key] = cfg.get_int(key, default)
        elif isinstance(default, float):
            resolved[key] = cfg.get_float(key, default)
        elif isinstance(default, tuple):
            resolved[key] = cfg.get_int_list(key, default)
        else:
            resolved[key] = cfg.get_str(key, default)
    if seed_override is not None:
        resolved["seed"] = seed_override
    return resolved


def _read_file(path: str, key: str) -> bytes:
    if not os.path.isfile(path):
        raise ConfigError(f"{key}: file {path!r} does not exist")
    with open(path, "rb") as f:
        return f.read()


def _load_idx_split(directory: str, key: str, split: str, name: str) -> RawDataset:
    if not os.path.isdir(directory):
        raise ConfigError(f"{key}: directory {directory!r} does not exist")
    image_name, label_name = _IDX_FILES[split]
    images = _read_file(os.path.join(directory, image_name), key)
    labels = _read_file(os.path.join(directory, label_name), key)
    return parse_idx(images, labels, name=name)


def _load_cifar_split(directory: str, key: str, split: str, name: str) -> RawDataset:
    if not os.path.isdir(directory):
        raise ConfigError(f"{key}: directory {directory!r} does not exist")
    if split == "train":
        paths = sorted(glob.glob(os.path.join(directory, "data_batch_*.bin")))
    else:
        paths = [os.path.join(directory, "test_batch.bin")]
    if not paths or not all(os.path.isfile(p) for p in paths):
        raise ConfigError(f"{key}: no CIFAR-10 batch files under {directory!r}")
    parts = [parse_cifar10(_read_file(p, key), name=name) for p in paths]
    return RawDataset(
        images=np.concatenate([p.images for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        name=name,
        n_classes=10,
    )


def _load_split(resolved: dict, split: str) -> RawDataset:
    name = resolved["dataset.name"]
    key = f"dataset.{split}_path"
    directory = resolved[key]
    if not directory:
        raise ConfigError(f"{key}: required but not set")
    if name in ("mnist", "fashion-mnist"):
        return _load_idx_split(directory, key, split, name)
    if name == "cifar10":
        return _load_cifar_split(directory, key, split, name)
    raise ConfigError(f"dataset.name: unknown dataset {name!r}")


def load_datasets(resolved: dict):
    """(train, test) datasets with subset carving applied to the train side."""
    seed = resolved["seed"]
    train_ds = _load_split(resolved, "train")
    if resolved["dataset.test_path"]:
        test_ds = _load_split(resolved, "test")
    else:
        train_ds, test_ds = train_test_split(
            train_ds, _FALLBACK_TEST_FRACTION, seed + _SEED_SPLIT
        )
    n = resolved["dataset.subset_n"]
    if n:
        train_ds = subset(train_ds, n, seed + _SEED_SUBSET)
    return train_ds, test_ds


def _agent_config(resolved: dict) -> AgentConfig:
    return AgentConfig(
        gamma=resolved["agent.gamma"],
        lam=resolved["agent.lambda"],
        epsilon_start=resolved["agent.epsilon_start"],
        epsilon_end=resolved["agent.epsilon_end"],
        epsilon_decay_episodes=resolved["agent.epsilon_decay"],
        learning_rate=resolved["agent.lr"],
        batch_episodes=resolved["agent.batch_episodes"],
        target_sync_period=resolved["agent.sync_period"],
        replay_capacity=resolved["agent.replay_capacity"],
        train_episodes=resolved["agent.train_episodes"],
        hidden=resolved["agent.hidden"],
        seed=resolved["seed"] + _SEED_AGENT,
    )


def _reward_spec(resolved: dict) -> RewardSpec:
    return RewardSpec(
        feature_cost=resolved["env.feature_cost"],
        reward_correct=resolved["env.reward_correct"],
        reward_wrong=resolved["env.reward_wrong"],
    )


def _write_manifest(out_dir: str, command: str, resolved: dict, artifacts: list[str],
                    started: float, started_at: str) -> None:
    manifest = {
        "command": command,
        "seed": resolved["seed"],
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in resolved.items()},
        "artifacts": sorted(artifacts),
        "duration_seconds": time.monotonic() - started,
        "started_at": started_at,
        "finished_at": datetime.now(timezone.utc).isoformat(),
    }
    atomic_write_text(
        os.path.join(out_dir, f"{command.replace('-', '_')}_manifest.json"),
        json.dumps(manifest, indent=2) + "\n",
    )


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def cmd_train_ae(resolved: dict, out_dir: str) -> list[str]:
    train_ds, _ = load_datasets(resolved)
    model = ConvAutoencoder(
        latent_dim=resolved["ae.latent_dim"],
        epochs=resolved["ae.epochs"],
        batch_size=resolved["ae.batch"],
        lr=resolved["ae.lr"],
        seed=resolved["seed"] + _SEED_AE,
    ).fit(train_ds.images)
    model_path = os.path.join(out_dir, AE_MODEL)
    save_autoencoder(model_path, model)
    loss_path = os.path.join(out_dir, AE_LOSS)
    lines = ["epoch,mse"] + [
        f"{epoch},{_fmt(mse)}" for epoch, mse in enumerate(model.loss_curve_, start=1)
    ]
    atomic_write_text(loss_path, "\n".join(lines) + "\n")
    return [model_path, loss_path]


def cmd_encode(resolved: dict, out_dir: str) -> list[str]:
    model_path = os.path.join(out_dir, AE_MODEL)
    if not os.path.isfile(model_path):
        raise ConfigError(f"autoencoder model {model_path!r} not found; run train-ae first")
    model = load_autoencoder(model_path)
    if model.latent_dim != resolved["ae.latent_dim"]:
        raise ConfigError(
            f"saved model has latent_dim {model.latent_dim}, config says "
            f"{resolved['ae.latent_dim']}"
        )
    train_ds, test_ds = load_datasets(resolved)
    train_path = os.path.join(out_dir, TRAIN_CACHE)
    test_path = os.path.join(out_dir, TEST_CACHE)
    write_feature_cache(train_path, encode_dataset(model, train_ds))
    write_feature_cache(test_path, encode_dataset(model, test_ds))
    return [train_path, test_path]


def cmd_train_agent(resolved: dict, out_dir: str) -> list[str]:
    cache_path = os.path.join(out_dir, TRAIN_CACHE)
    if not os.path.isfile(cache_path):
        raise ConfigError(f"feature cache {cache_path!r} not found; run encode first")
    feats = read_feature_cache(cache_path, source_dataset=resolved["dataset.name"])
    eval_path = os.path.join(out_dir, TEST_CACHE)
    eval_feats = (
        read_feature_cache(eval_path, source_dataset=resolved["dataset.name"])
        if os.path.isfile(eval_path)
        else None
    )
    qnet, rows = train(feats, _agent_config(resolved), _reward_spec(resolved), eval_feats)
    model_path = os.path.join(out_dir, AGENT_MODEL)
    save_network(model_path, qnet)
    metrics_path = os.path.join(out_dir, AGENT_METRICS)
    atomic_write_text(metrics_path, metrics_csv_text(rows))
    return [model_path, metrics_path]


def _fit_baseline(resolved: dict, out_dir: str) -> tuple[PegasosSvm, float]:
    train_path = os.path.join(out_dir, TRAIN_CACHE)
    test_path = os.path.join(out_dir, TEST_CACHE)
    for path in (train_path, test_path):
        if not os.path.isfile(path):
            raise ConfigError(f"feature cache {path!r} not found; run encode first")
    train_feats = read_feature_cache(train_path, source_dataset=resolved["dataset.name"])
    test_feats = read_feature_cache(test_path, source_dataset=resolved["dataset.name"])
    model = PegasosSvm(seed=resolved["seed"] + _SEED_SVM)
    model.fit(train_feats.features, train_feats.labels)
    return model, baseline_accuracy(model, test_feats)


def cmd_eval(resolved: dict, out_dir: str) -> list[str]:
    model_path = os.path.join(out_dir, AGENT_MODEL)
    if not os.path.isfile(model_path):
        raise ConfigError(f"agent model {model_path!r} not found; run train-agent first")
    qnet = load_network(model_path)
    test_feats = read_feature_cache(
        os.path.join(out_dir, TEST_CACHE), source_dataset=resolved["dataset.name"]
    )
    stats = evaluate(qnet, test_feats, _reward_spec(resolved))
    _, svm_acc = _fit_baseline(resolved, out_dir)
    summary_path = os.path.join(out_dir, EVAL_SUMMARY)
    row = (
        f"{resolved['dataset.name']},{_fmt(stats.accuracy)},{_fmt(stats.avg_reward)},"
        f"{_fmt(stats.avg_features_used)},{_fmt(svm_acc)}"
    )
    atomic_write_text(
        summary_path,
        "dataset,accuracy,avg_reward,avg_features_used,baseline_accuracy\n" + row + "\n",
    )
    print(
        f"{resolved['dataset.name']}: accuracy={stats.accuracy:.4f} "
        f"avg_reward={stats.avg_reward:.4f} "
        f"avg_features_used={stats.avg_features_used:.2f} baseline={svm_acc:.4f}"
    )
    return [summary_path]


def cmd_baseline(resolved: dict, out_dir: str) -> list[str]:
    model, svm_acc = _fit_baseline(resolved, out_dir)
    svm_path = os.path.join(out_dir, SVM_MODEL)
    model.save(svm_path)
    csv_path = os.path.join(out_dir, BASELINE_CSV)
    atomic_write_text(
        csv_path, f"dataset,svm_accuracy\n{resolved['dataset.name']},{_fmt(svm_acc)}\n"
    )
    print(f"{resolved['dataset.name']}: svm_accuracy={svm_acc:.4f}")
    return [csv_path, svm_path]


_COMMANDS = {
    "train-ae": cmd_train_ae,
    "encode": cmd_encode,
    "train-agent": cmd_train_agent,
    "eval": cmd_eval,
    "baseline": cmd_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeddqn",
        description="Latent-feature acquisition experiments: autoencoder + Q-learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out-dir", default="runs", help="artifact directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    started_at = datetime.now(timezone.utc).isoformat()
    try:
        resolved = resolve_config(args.config, args.seed)
        os.makedirs(args.out_dir, exist_ok=True)
        artifacts = _COMMANDS[args.command](resolved, args.out_dir)
        _write_manifest(args.out_dir, args.command, resolved, artifacts, started, started_at)
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
