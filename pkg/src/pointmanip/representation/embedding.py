"""Deterministic task-instruction embedding.

A 64-dim feature-hashed bag of words stands in for a learned sentence
encoder: it only needs to give distinct tasks distinct, stable vectors. Token
hashing uses md5 so the embedding is identical across processes and runs.
"""

import hashlib
import re
from functools import lru_cache

import numpy as np

EMBEDDING_DIM = 64

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@lru_cache(maxsize=256)
def _embed_cached(instruction: str) -> bytes:
    vec = np.zeros(EMBEDDING_DIM)
    for token in _TOKEN_RE.findall(instruction.lower()):
        digest = hashlib.md5(token.encode()).digest()
        bucket = int.from_bytes(digest[:4], "little") % EMBEDDING_DIM
        sign = 1.0 if digest[4] & 1 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec.tobytes()


def embed_task(instruction: str) -> np.ndarray:
    """L2-normalized 64-vector for a non-empty instruction string."""
    if not instruction:
        raise ValueError("instruction must be non-empty")
    return np.frombuffer(_embed_cached(instruction), dtype=np.float64).copy()
