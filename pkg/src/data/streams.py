"""
Random streams.

Every random draw in the toolkit comes from numpy's PCG64 generator seeded through a
`SeedSequence`. Substreams are addressed by a spawn key (for example the iteration index
of path generation), so work split across threads sees the same numbers as a serial run.
"""
import numpy as np


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Return a PCG64 generator for `seed`, optionally addressed by a substream key."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.PCG64(sequence))
