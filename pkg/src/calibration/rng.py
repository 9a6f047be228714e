"""
Counter-based RNG substreams.

Replicate i draws from a generator seeded by

    SplitMix64(master_seed XOR (i+1)·0x9E3779B97F4A7C15)

so its randomness does not depend on which worker runs it or when. Index
-1 is the reference stream used for draws tied to the observed data.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
REFERENCE_STREAM = -1


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x``."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_seed(master_seed: int, index: int) -> int:
    return splitmix64((int(master_seed) ^ (((int(index) + 1) * GOLDEN_GAMMA) & MASK64)) & MASK64)


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index``."""
    return np.random.Generator(np.random.PCG64(substream_seed(master_seed, index)))
