"""Seedable 64-bit random generator with a pinned, documented algorithm.

Fixture reproducibility (and reimplementation in other languages) requires
a generator whose every step is specified, so this module implements
xoshiro256** 1.0 seeded through splitmix64 instead of wrapping an
interpreter-dependent source:

* state: four 64-bit words, filled with consecutive splitmix64 outputs;
* splitmix64: ``z = (x += 0x9E3779B97F4B7C15)``,
  ``z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9``,
  ``z = (z ^ z >> 27) * 0x94D049BB133111EB``, ``z ^ z >> 31``;
* output: ``rotl(s1 * 5, 7) * 9``; update: standard xoshiro256** shifts
  (s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= s1 << 17; s3 = rotl(s3, 45)).

Substreams are derived by folding integer stream labels into the seed with
splitmix64 before state initialization, so ``Rng(seed, a, b)`` is a stable
function of ``(seed, a, b)`` only.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new state, output)."""
    x = (x + 0x9E3779B97F4B7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Rng:
    """xoshiro256** generator bound to a seed and optional stream labels."""

    def __init__(self, seed: int, *stream: int) -> None:
        x = seed & _MASK
        for label in stream:
            x, mixed = _splitmix64(x ^ (label & _MASK))
            x = mixed
        s = []
        for _ in range(4):
            x, out = _splitmix64(x)
            s.append(out)
        # All-zero state is invalid for xoshiro; splitmix64 cannot emit four
        # zeros from any input, so no further guard is needed.
        self._s = s

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

    def below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # Reject draws below the first multiple of bound in 2^64 space.
        threshold = (1 << 64) % bound
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % bound

    def uniform(self) -> float:
        """float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_open(self) -> float:
        """float in (0, 1], safe as a log argument."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal(self) -> float:
        """Standard normal via the Box-Muller transform (cosine branch)."""
        u1 = self.uniform_open()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
