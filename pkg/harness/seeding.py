"""
Seed derivation.

Every random stream of a run (history, grade training, scenario i, episode
exploration, ...) gets its own generator derived from the master seed and a
stable stream name, so results do not depend on call order.
"""

import zlib

import numpy as np


def stream_id(name):
    """Stable 32-bit id of a stream name."""
    return zlib.crc32(name.encode("utf-8"))


def seed_sequence(master, stream, index=0):
    return np.random.SeedSequence(entropy=int(master), spawn_key=(stream_id(stream), int(index)))


def derive_seed(master, stream, index=0):
    """64-bit integer seed for (master, stream, index)."""
    low, high = seed_sequence(master, stream, index).generate_state(2, dtype=np.uint32)
    return int(high) << 32 | int(low)


def make_rng(master, stream, index=0):
    return np.random.default_rng(seed_sequence(master, stream, index))
