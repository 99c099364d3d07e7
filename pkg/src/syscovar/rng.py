"""Seeded random streams.

Every stream is a numpy ``Generator`` over PCG64.  A master seed and a cell
index are combined with ``SeedSequence((seed, index))`` into a 64-bit cell
seed, so each backtest cell can be regenerated on its own from the seed
printed next to it.
"""
import numpy as np

RNG_ALGORITHM = "PCG64"


def derive_seed(seed, index):
    """64-bit child seed for stream ``index`` under master ``seed``."""
    state = np.random.SeedSequence((int(seed), int(index))).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))
