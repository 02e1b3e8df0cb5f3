"""
Seeded randomness.

All randomness flows from numpy's PCG64 bit generator, seeded with a 64-bit
integer from the run configuration.
"""
from typing import List

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64-backed generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent child generators, stable for a given (seed, count)."""
    children = np.random.SeedSequence(int(seed) & SEED_MASK).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]
