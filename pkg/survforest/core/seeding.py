"""
Deterministic seed derivation.

Every random stream in the toolkit is derived from a master seed plus a
tuple of integer keys (tree index, test index, tree path ...), never from
scheduling order, so sequential and parallel execution agree bit for bit.
"""

import zlib

import numpy as np

# Named stream keys
STREAM_BOOTSTRAP = 0
STREAM_TREE = 1
STREAM_CASE = 2
STREAM_GLOBAL = 3
STREAM_SPLIT = 4
STREAM_PILOT = 5


def _as_key(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ValueError(f"seed keys must be nonnegative, got {key}")
    return int(key)


def seed_sequence(seed: int, *keys: int | str) -> np.random.SeedSequence:
    """Seed sequence for the stream identified by ``keys`` under ``seed``."""
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_as_key(k) for k in keys))


def derive_seed(seed: int, *keys: int | str) -> int:
    """Derive a child integer seed (63-bit, nonnegative) from ``seed`` and ``keys``."""
    state = seed_sequence(seed, *keys).generate_state(1, dtype=np.uint64)[0]
    return int(state >> np.uint64(1))


def make_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """Generator for the stream identified by ``keys`` under ``seed``."""
    return np.random.default_rng(seed_sequence(seed, *keys))
