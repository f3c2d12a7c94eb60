"""Scaling decision head: pick which container to scale and by how much.

An instance-selector MLP scores every container embedding and the argmax
wins (ties to the lowest index).  A scale-selector MLP scores the chosen
embedding concatenated with each candidate amount in [-m, +m] (normalised
by m); ties prefer the candidate nearest zero, negative before positive.
Both selectors are deterministic — exploration happens in parameter space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .executor import ScalingAction


@dataclass
class MlpParams:
    """Two-layer perceptron, tanh hidden, scalar output."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


@dataclass
class PolicyParams:
    phi: MlpParams            # instance selector
    scale_ff_w: np.ndarray    # embedding transform before candidate concat
    scale_ff_b: np.ndarray
    omega: MlpParams          # scale selector
    scale_bound: int = 4

    def __post_init__(self) -> None:
        if self.scale_bound < 0:
            raise ValueError("scale bound must be non-negative")


def scale_candidates(bound: int) -> np.ndarray:
    return np.arange(-bound, bound + 1, dtype=np.int64)


def _mlp(p: MlpParams, x: np.ndarray) -> np.ndarray:
    return (np.tanh(x @ p.w1.T + p.b1) @ p.w2.T + p.b2)[..., 0]


def container_priorities(embeddings: np.ndarray, phi: MlpParams) -> np.ndarray:
    if embeddings.shape[0] == 0:
        raise ValueError("no container embeddings to score")
    return _mlp(phi, embeddings)


def select_container(embeddings: np.ndarray, phi: MlpParams) -> int:
    """Index of the highest-priority container; ties to the lowest index."""
    return int(np.argmax(container_priorities(embeddings, phi)))


def scale_priorities(embedding: np.ndarray, params: PolicyParams) -> tuple[np.ndarray, np.ndarray]:
    cands = scale_candidates(params.scale_bound)
    transformed = np.tanh(embedding @ params.scale_ff_w.T + params.scale_ff_b)
    denom = float(params.scale_bound) if params.scale_bound else 1.0
    rows = np.concatenate(
        [np.tile(transformed, (cands.size, 1)), (cands / denom)[:, None]], axis=1
    )
    return cands, _mlp(params.omega, rows)


def select_scale(embedding: np.ndarray, params: PolicyParams) -> int:
    """Candidate amount with the highest priority; ties prefer the value
    nearest zero, negative before positive."""
    cands, prios = scale_priorities(embedding, params)
    best = prios.max()
    tied = [int(c) for c, p in zip(cands, prios) if p == best]
    tied.sort(key=lambda s: (abs(s), s > 0))
    return tied[0]


def act(embeddings: np.ndarray, params: PolicyParams) -> ScalingAction:
    """Compose the two selectors into one scaling action."""
    ind = select_container(embeddings, params.phi)
    scale = select_scale(embeddings[ind], params)
    return ScalingAction(ind=ind, scale=scale)
