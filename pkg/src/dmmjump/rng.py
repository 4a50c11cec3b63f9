"""Counter-based random streams built on the SplitMix64 finalizer.

Draw ``i`` (0-based) of the stream seeded with ``s`` is
``mix64(s + (i + 1) * GOLDEN_GAMMA mod 2**64)``, which is exactly the
SplitMix64 generator. Being counter-based, a block of draws is a vectorized
function of the counter, so the streams are cheap in numpy and trivial to
reproduce elsewhere.

Constants::

    GOLDEN_GAMMA = 0x9E3779B97F4A7C15
    mix64(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
              return z ^ (z >> 31)

Uniform doubles take the top 53 bits: ``(u >> 11) * 2**-53`` in ``[0, 1)``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

_G = np.uint64(GOLDEN_GAMMA)
_M1 = np.uint64(MIX1)
_M2 = np.uint64(MIX2)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def run_seed(master_seed: int, instance_idx: int, repeat_idx: int) -> int:
    """Derive the 64-bit stream seed for one (instance, repeat) cell.

    Each stage is a bijection of its input, so distinct indices under one
    master seed can only collide by a full 64-bit coincidence.
    """
    h = mix64(master_seed + GOLDEN_GAMMA)
    h = mix64(h ^ (instance_idx & MASK64))
    return mix64(((h + GOLDEN_GAMMA) & MASK64) ^ (repeat_idx & MASK64))


def domain_seed(seed: int, tag: int) -> int:
    """Separate the stream of one consumer from another fed the same user seed.

    Without this, ``gen --seed s`` and ``solve --seed s`` would read the same
    draws, and the random initial voltages would decode to the planted
    assignment.
    """
    return mix64((seed ^ tag) & MASK64)


class Stream:
    """Sequential view over a counter-based SplitMix64 stream."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.counter = 0

    def u64(self, k: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + k + 1, dtype=np.uint64)
        self.counter += k
        with np.errstate(over="ignore"):
            return _mix64_array(np.uint64(self.seed) + idx * _G)

    def uniform(self, k: int) -> np.ndarray:
        """``k`` doubles in ``[0, 1)``."""
        return (self.u64(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def below(self, bounds, k: int | None = None) -> np.ndarray:
        """Integers in ``[0, bound)`` via ``floor(u * bound)``.

        ``bounds`` may be a scalar (with ``k`` draws) or an array (one draw per
        entry). The bias is below ``bound / 2**53``.
        """
        b = np.asarray(bounds, dtype=np.float64)
        if b.ndim == 0:
            b = np.full(k, float(b))
        return np.floor(self.uniform(b.size) * b).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of ``range(n)``: stable argsort of ``n`` draws."""
        return np.argsort(self.u64(n), kind="stable")

    def signs(self, k: int) -> np.ndarray:
        """``k`` booleans from the top bit of each draw."""
        return (self.u64(k) >> np.uint64(63)).astype(bool)
