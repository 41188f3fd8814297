"""Independent, reproducible random streams keyed by (master seed, labels...).

Philox is counter-based, so each (master, key) pair gets its own stream with
no coordination between workers.
"""
from __future__ import annotations

import zlib

import numpy as np

INSTANCE = 0
REWARDS = 1


def label(text: str) -> int:
    """Stable 32-bit key for a string label (policy ids etc.)."""
    return zlib.crc32(text.encode())


def stream(master_seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
