"""Seed derivation and RNG construction.

Every random object in the library is drawn from a Philox (counter-based)
generator keyed by a 64-bit seed.  Child seeds are derived with the
SplitMix64 finaliser so that a stream depends only on the tuple of integers
that names it, never on scheduling order::

    derive_seed(master, a, b, ...) = fold(mix64(acc ^ mix64(x)) for x in (a, b, ...))

with ``acc`` starting at ``mix64(master)``.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finaliser (Steele, Lea, Flood 2014)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *path: int) -> int:
    acc = mix64(master & MASK64)
    for x in path:
        acc = mix64(acc ^ mix64(int(x) & MASK64))
    return acc


def make_rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(derive_seed(seed, *path)))
