"""Deterministic derivation of random generators from a master seed."""

from __future__ import annotations

from zlib import crc32

import numpy as np


def rng_for(seed: int, *tags: str) -> np.random.Generator:
    """Generator keyed by the master seed plus a stable purpose tag chain."""
    entropy = [int(seed) & 0xFFFFFFFF] + [crc32(str(t).encode()) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
