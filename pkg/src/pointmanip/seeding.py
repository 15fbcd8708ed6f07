"""Deterministic seed derivation.

Every stochastic operation takes an explicit integer seed. Sub-seeds are
derived by hashing the parent seed together with a string path, so that
adding or reordering consumers never shifts another consumer's stream.
Python's builtin hash() is salted per process and must never be used here.
"""

import hashlib

import numpy as np


def derive_seed(seed: int, *path) -> int:
    """Derive a child seed from (seed, path). Stable across processes."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for part in path:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "little")


def rng_from(seed: int, *path) -> np.random.Generator:
    """Seeded PCG64 generator for (seed, path)."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *path)))
