"""Seedable, splittable random streams shared by the generator, forest, and CV.

Every component that needs randomness derives an independent child stream
from a 64-bit master seed and a stream index.  The derivation is a SHA-256
hash of the two integers, so child streams are stable across platforms,
thread counts, and numpy versions, which is what makes byte-identical
reruns possible.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

__all__ = ["child_seed", "child_rng"]


MASK64 = 0xFFFFFFFFFFFFFFFF


def child_seed(seed: int, stream: int) -> int:
    """Derive the 64-bit seed of child stream ``stream`` from ``seed``.

    Inputs are reduced modulo 2^64, so derived seeds can feed back in as
    master seeds (fold seeds spawning per-tree seeds, for example).
    """
    digest = hashlib.sha256(
        struct.pack("<QQ", seed & MASK64, stream & MASK64)
    ).digest()
    return int.from_bytes(digest[:8], "little")


def child_rng(seed: int, stream: int) -> np.random.Generator:
    """PCG64 generator for child stream ``stream`` of master ``seed``."""
    return np.random.Generator(np.random.PCG64(child_seed(seed, stream)))
