"""Deterministic, platform-independent random number generation.

All stochastic behaviour in the package (weight init, shuffling,
epsilon-greedy draws, replay sampling) flows through SeededRng so that a
single integer seed reproduces a run bit-for-bit on any platform.
"""

from __future__ import annotations

import numpy as np

# splitmix64 constants. Update rule, all arithmetic mod 2**64:
#   state += 0x9E3779B97F4A7C15                      (golden-ratio increment)
#   z = state
#   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
#   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
#   output = z ^ (z >> 31)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
# a double in [0,1) keeps the top 53 bits
_INV_2_53 = float(2.0**-53)


def _mix(z: np.ndarray) -> np.ndarray:
    # wraparound on uint64 is the intended arithmetic here
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


class SeededRng:
    """splitmix64 stream. The counter form makes bulk draws vectorizable."""

    def __init__(self, seed: int):
        self._state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    def _advance(self, n: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            counters = self._state + _GAMMA * np.arange(1, n + 1, dtype=np.uint64)
        self._state = counters[-1]
        return _mix(counters)

    def next_u64(self) -> int:
        with np.errstate(over="ignore"):
            self._state = self._state + _GAMMA
        return int(_mix(self._state))

    def uniform(self, n: int) -> np.ndarray:
        """n doubles in [0, 1), as a float64 vector."""
        if n < 0:
            raise ValueError(f"draw count must be >= 0, got {n}")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        return (self._advance(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def random(self) -> float:
        """One double in [0, 1)."""
        return float((self.next_u64() >> 11) * _INV_2_53)

    def randint(self, bound: int) -> int:
        """One integer in [0, bound). Modulo bias is ~bound/2**64, ignored."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound

    def integers(self, bound: int, n: int) -> np.ndarray:
        """n integers in [0, bound), as an int64 vector."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        if n == 0:
            return np.empty(0, dtype=np.int64)
        return (self._advance(n) % np.uint64(bound)).astype(np.int64)

    def uniform_range(self, low: float, high: float, n: int) -> np.ndarray:
        return low + (high - low) * self.uniform(n)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) via stable argsort of random keys."""
        return np.argsort(self.uniform(n), kind="stable")
