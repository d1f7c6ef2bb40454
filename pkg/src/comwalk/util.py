"""Seed derivation helpers.

Every randomized stage draws from its own stream, derived from the master
seed plus a stage tag and loop indices. Results are therefore reproducible
for a fixed seed no matter how work is sliced across workers.
"""

import random

import numpy as np

# stage tags, arbitrary but fixed
SEED_INIT = 1
SEED_SHUFFLE = 2
SEED_WALK = 3
SEED_TRAIN = 4
SEED_SPLIT = 5
SEED_EVAL = 6
SEED_COMM = 7


def derive_seed(*parts: int) -> int:
    """Mix integer parts into one well-distributed 64-bit seed."""
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint64)[0])


def derived_rng(*parts: int) -> random.Random:
    """A stdlib Random seeded from the mixed parts."""
    return random.Random(derive_seed(*parts))


def derived_generator(*parts: int) -> np.random.Generator:
    """A numpy Generator seeded from the mixed parts."""
    return np.random.default_rng(derive_seed(*parts))
