"""Deterministic pseudo-randomness.

Every random draw in the package comes from a splitmix64 stream whose seed is
derived by SHA-256 from (master seed, purpose tag, index).  Pure integer
arithmetic, so streams are bit-identical across platforms, Python versions and
thread schedules.  The algorithm identifier below is stored in every artifact
that records randomness.
"""

from __future__ import annotations

import hashlib

RNG_ID = "splitmix64/sha256-streams/v1"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def stream_seed(master_seed: int, tag: str, index: int = 0) -> int:
    """64-bit substream key for (master seed, purpose tag, index)."""
    data = f"{master_seed & _MASK64}\x1f{tag}\x1f{index}".encode()
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "little")


class SplitMix64:
    """The splitmix64 generator (Steele, Lea, Flood 2014); 64-bit state."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = ((1 << 64) // n) * n
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0**-53)


def substream(master_seed: int, tag: str, index: int = 0) -> SplitMix64:
    return SplitMix64(stream_seed(master_seed, tag, index))
