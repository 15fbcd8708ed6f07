"""Action chunking with exponential temporal ensembling.

Every policy call emits a chunk of future actions; at execution step t all
live chunks vote on their prediction for t, weighted by exp(-m * age) where
age is the number of steps since the chunk was born. Components (position,
rotation6d, gripper scalar) are averaged before the rotation is decoded, so
the blended action stays inside the componentwise convex hull of the votes.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import NoCoveringChunk


@dataclass(frozen=True)
class ActionChunk:
    actions: np.ndarray  # (chunk_len, 10)
    birth_step: int

    @property
    def chunk_len(self) -> int:
        return self.actions.shape[0]

    def covers(self, t: int) -> bool:
        return self.birth_step <= t < self.birth_step + self.chunk_len

    def action_at(self, t: int) -> np.ndarray:
        return self.actions[t - self.birth_step]


def temporal_ensemble(history: list, t: int, m: float = 0.1) -> np.ndarray:
    """Blend all chunks covering step t into a single 10-vector action."""
    votes, weights = [], []
    for chunk in history:
        if chunk.covers(t):
            votes.append(chunk.action_at(t))
            weights.append(np.exp(-m * (t - chunk.birth_step)))
    if not votes:
        raise NoCoveringChunk(f"no chunk covers step {t}")
    w = np.array(weights)
    w /= w.sum()
    return (np.stack(votes) * w[:, None]).sum(axis=0)
