"""Seeded splitmix64 generator.

Every piece of randomness in the package flows through this class so that a
seed fully determines corpus images, weight initialization, shuffles, and
sampling, bit-exactly, on any platform.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class Rng:
    """splitmix64: one 64-bit word of state, published reference outputs."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Uniform float in [lo, hi), from the top 53 bits of the next word."""
        if not lo < hi:
            raise ValueError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi})")
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + u * (hi - lo)

    def uniform_block(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """n uniforms, bit-identical to n sequential uniform() calls.

        splitmix64 state advances by a fixed constant per draw, so the whole
        block can be mixed vectorized from state + i*gamma (mod 2^64).
        """
        if not lo < hi:
            raise ValueError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi})")
        if n < 0:
            raise ValueError(f"block size must be >= 0, got {n}")
        steps = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GAMMA)
        z = np.uint64(self.state) + steps
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * _GAMMA) & _MASK64
        u = (z >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return lo + u * (hi - lo)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is negligible for n << 2^64."""
        if n < 1:
            raise ValueError(f"below() needs n >= 1, got {n}")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
