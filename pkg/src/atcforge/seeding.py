"""Deterministic derivation of per-item random streams.

Both the augmentation chain and the dataset splitter need an ordering or
random stream that depends on (seed, string key) and nothing else, so that
results are identical regardless of worker count or list position.  The
mixing function is keyed BLAKE2b, fixed for the life of the file formats.
"""

from __future__ import annotations

import hashlib

import numpy as np


def mix64(seed: int, key: str) -> int:
    """Stable 64-bit hash of a string key under a 64-bit seed."""
    h = hashlib.blake2b(
        key.encode("utf-8"),
        digest_size=8,
        key=(seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little"),
    )
    return int.from_bytes(h.digest(), "little")


def stream_for(seed: int, key: str) -> np.random.Generator:
    """Independent PCG64 stream for one (seed, key) pair."""
    return np.random.Generator(np.random.PCG64(mix64(seed, key)))
