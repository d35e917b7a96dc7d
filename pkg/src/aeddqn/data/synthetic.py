"""Deterministic synthetic digit images in the IDX container format.

Generates 28x28 grayscale glyph images (10 classes) with per-sample
translation, stroke-intensity and additive-noise jitter. Useful for
offline demos and desk-scale experiments when the real datasets are not
on disk. Files are written under the official MNIST names so the normal
loading path applies unchanged.

Run `python -m aeddqn.data.synthetic OUT_DIR` to create a dataset.
"""

from __future__ import annotations

import os

import numpy as np

from ..fileio import atomic_write_bytes
from ..rng import SeededRng
from .dataset import RawDataset
from .idx import write_idx_images, write_idx_labels

_GLYPHS = [
    # 0
    ["..###..",
     ".#...#.",
     "#.....#",
     "#.....#",
     "#.....#",
     ".#...#.",
     "..###.."],
    # 1
    ["...#...",
     "..##...",
     ".#.#...",
     "...#...",
     "...#...",
     "...#...",
     ".#####."],
    # 2
    [".####..",
     "#....#.",
     ".....#.",
     "....#..",
     "..##...",
     ".#.....",
     "######."],
    # 3
    [".####..",
     "#....#.",
     ".....#.",
     "..###..",
     ".....#.",
     "#....#.",
     ".####.."],
    # 4
    ["...##..",
     "..#.#..",
     ".#..#..",
     "#...#..",
     "######.",
     "....#..",
     "....#.."],
    # 5
    ["######.",
     "#......",
     "#####..",
     ".....#.",
     ".....#.",
     "#....#.",
     ".####.."],
    # 6
    ["..###..",
     ".#.....",
     "#......",
     "#####..",
     "#....#.",
     "#....#.",
     ".####.."],
    # 7
    ["######.",
     ".....#.",
     "....#..",
     "...#...",
     "..#....",
     "..#....",
     "..#...."],
    # 8
    [".####..",
     "#....#.",
     "#....#.",
     ".####..",
     "#....#.",
     "#....#.",
     ".####.."],
    # 9
    [".####..",
     "#....#.",
     "#....#.",
     ".#####.",
     ".....#.",
     "....#..",
     ".###..."],
]

SIDE = 28
_SCALE = 3          # 7x7 glyph -> 21x21 stamp
_STAMP = 7 * _SCALE
_MAX_OFFSET = SIDE - _STAMP  # stamp placement range per axis


def _glyph_stamps() -> np.ndarray:
    stamps = np.zeros((10, _STAMP, _STAMP))
    for digit, rows in enumerate(_GLYPHS):
        bitmap = np.array([[ch == "#" for ch in row] for row in rows], dtype=np.float64)
        stamps[digit] = np.kron(bitmap, np.ones((_SCALE, _SCALE)))
    return stamps


def make_digits(n: int, seed: int, noise: float = 0.25) -> RawDataset:
    """n jittered glyph images with uniform random labels."""
    rng = SeededRng(seed)
    stamps = _glyph_stamps()
    labels = rng.integers(10, n)
    dy = rng.integers(_MAX_OFFSET + 1, n)
    dx = rng.integers(_MAX_OFFSET + 1, n)
    intensity = rng.uniform_range(0.65, 1.0, n)
    background = noise * rng.uniform(n * SIDE * SIDE).reshape(n, SIDE, SIDE)
    images = background
    for i in range(n):
        y, x = dy[i], dx[i]
        images[i, y : y + _STAMP, x : x + _STAMP] += intensity[i] * stamps[labels[i]]
    np.clip(images, 0.0, 1.0, out=images)
    # quantize like a real 8-bit capture so IDX round-trips are exact
    images = np.round(images * 255.0) / 255.0
    return RawDataset(images=images, labels=labels, name="synthetic-digits", n_classes=10)


def write_idx_dataset(out_dir: str, n_train: int, n_test: int, seed: int,
                      noise: float = 0.25) -> dict[str, str]:
    """Write train/test IDX files under the official MNIST file names."""
    train = make_digits(n_train, seed=seed, noise=noise)
    test = make_digits(n_test, seed=seed + 1, noise=noise)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "train_images": os.path.join(out_dir, "train-images-idx3-ubyte"),
        "train_labels": os.path.join(out_dir, "train-labels-idx1-ubyte"),
        "test_images": os.path.join(out_dir, "t10k-images-idx3-ubyte"),
        "test_labels": os.path.join(out_dir, "t10k-labels-idx1-ubyte"),
    }
    atomic_write_bytes(paths["train_images"],
                       write_idx_images(np.round(train.images * 255.0).astype(np.uint8)))
    atomic_write_bytes(paths["train_labels"], write_idx_labels(train.labels))
    atomic_write_bytes(paths["test_images"],
                       write_idx_images(np.round(test.images * 255.0).astype(np.uint8)))
    atomic_write_bytes(paths["test_labels"], write_idx_labels(test.labels))
    return paths


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--train", type=int, default=8000)
    parser.add_argument("--test", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=float, default=0.25)
    args = parser.parse_args(argv)
    paths = write_idx_dataset(args.out_dir, args.train, args.test, args.seed, args.noise)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
