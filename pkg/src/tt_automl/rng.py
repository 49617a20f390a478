"""Seedable deterministic PRNG: splitmix64 seeding a xoshiro256** generator.

The algorithm is fixed so that streams (and therefore optimizer traces and training
runs) reproduce bit for bit on every platform.
"""

from __future__ import annotations

import math
from typing import MutableSequence, TypeVar

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_64 = 1 << 64


def _rotl(value: int, shift: int) -> int:
    return ((value << shift) | (value >> (64 - shift))) & _MASK


def splitmix64(state: int) -> tuple[int, int]:
    """Returns (new state, output)."""
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


T = TypeVar("T")


class Rng:
    """xoshiro256** generator. Not thread-safe; concurrent tasks fork their own."""

    def __init__(self, seed: int) -> None:
        self.seed = seed & _MASK
        state = self.seed
        words = []
        for _ in range(4):
            state, out = splitmix64(state)
            words.append(out)
        self._s = words

    @classmethod
    def derive(cls, seed: int, stream: int) -> Rng:
        """Independent generator for the (seed, stream-id) pair."""
        _, mixed = splitmix64((seed ^ ((stream * _GOLDEN) & _MASK)) & _MASK)
        return cls(mixed)

    def fork(self, stream: int) -> Rng:
        return Rng.derive(self.seed, stream)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        if not lo < hi:
            raise ValueError(f"invalid bounds [{lo}, {hi})")
        return lo + (hi - lo) * self.random()

    def integer(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError(f"invalid bound {n}")
        limit = _TWO_POW_64 - (_TWO_POW_64 % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def normal(self) -> float:
        """Standard normal via Box-Muller; one pair of uniforms per draw."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normals(self, count: int) -> list[float]:
        return [self.normal() for _ in range(count)]

    def shuffle(self, items: MutableSequence[T]) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integer(i + 1)
            items[i], items[j] = items[j], items[i]


def rng_uniform(rng: Rng, lo: float, hi: float) -> float:
    return rng.uniform(lo, hi)


def rng_int(rng: Rng, n: int) -> int:
    return rng.integer(n)


def rng_normal(rng: Rng) -> float:
    return rng.normal()
