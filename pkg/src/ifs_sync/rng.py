"""Seeded random streams.

Every random draw in the package comes from a Philox generator keyed by
``(seed, *key)``. Philox is counter based, so a substream depends only on its
key and never on how many other streams were consumed before it.
"""

from __future__ import annotations

import numpy as np

SEED_BITS = 64


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for substream ``key`` of ``seed``."""
    if not 0 <= seed < 2**SEED_BITS:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 64-bit seed from ``rng`` for keyed substreams."""
    return int(rng.integers(0, 2**63, dtype=np.int64))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(int(rng))
