"""Deterministic seed derivation.

All randomised routines in this package draw from numpy's PCG64 generator.
Sub-streams (solver restarts, experiment grid points, replicates) get their
own seeds through the SplitMix64 finaliser below, so that distinct indices
never share a stream.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 finalisation step; a bijection on 64-bit integers."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(base: int, index: int) -> int:
    """Seed for sub-stream `index` of the stream seeded by `base`."""
    return splitmix64(splitmix64(base & _MASK64) ^ (index & _MASK64))


def mix_seed(base: int, point: int, replicate: int) -> int:
    """Seed for one (grid point, replicate) cell of an experiment.

    Injective in (point, replicate) for a fixed base as long as both indices
    fit in 32 bits: the pair is packed into one 64-bit word before the
    bijective finaliser is applied.
    """
    if not (0 <= point < (1 << 32) and 0 <= replicate < (1 << 32)):
        raise ValueError("point and replicate indices must fit in 32 bits")
    return splitmix64(splitmix64(base & _MASK64) ^ ((point << 32) | replicate))


def rng_from_seed(seed: int) -> np.random.Generator:
    """The package-wide PRNG: PCG64 behind numpy's Generator front end."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))
