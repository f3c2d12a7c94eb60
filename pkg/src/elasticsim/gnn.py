"""Forward-only hierarchical graph attention encoder.

Each layer scores every edge with a shared attention vector over the
concatenated transformed endpoint features, softmax-normalises the scores
per destination node, and aggregates neighbour messages under a sigmoid.
Embeddings flow bottom-up: PM embeddings are concatenated onto VM raw
features before the VM layer runs, and VM embeddings onto container raw
features before the two container layers run.  Training happens in
parameter space (evolution strategies), so there is no backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .hgraph import EdgeArrays, HierGraph

LEAKY_SLOPE = 0.2


@dataclass
class GatLayerParams:
    """One attention layer: feature transform plus the scoring vector."""

    weight: np.ndarray  # (out_dim, in_dim)
    attn: np.ndarray    # (2 * out_dim,)

    def __post_init__(self) -> None:
        out_dim = self.weight.shape[0]
        if self.attn.shape != (2 * out_dim,):
            raise ValueError("attention vector must have twice the output width")


@dataclass
class FeedForwardParams:
    """One hidden tanh layer, linear output."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


@dataclass
class EncoderParams:
    """Per-layer attention stacks; machine layers are None when ablated."""

    pm: GatLayerParams | None
    vm: GatLayerParams | None
    vm_ff: FeedForwardParams | None
    con1: GatLayerParams
    con2: GatLayerParams
    con_ff: FeedForwardParams

    @property
    def embed_dim(self) -> int:
        return self.con2.weight.shape[0]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _edge_scores(layer: GatLayerParams, feats: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    msg = feats @ layer.weight.T
    width = msg.shape[1]
    s_dst = msg @ layer.attn[:width]
    s_src = msg @ layer.attn[width:]
    return msg, s_dst, s_src


def attention_coefficients(
    layer: GatLayerParams, feats: np.ndarray, edges: EdgeArrays, node: int
) -> np.ndarray:
    """Softmax attention row of one node over its incoming edges, in edge
    order.  Requires the node to have at least a self-loop."""
    msg, s_dst, s_src = _edge_scores(layer, feats)
    _, alpha = kernels.aggregate(msg, s_dst, s_src, edges[0], edges[1], feats.shape[0], LEAKY_SLOPE)
    mask = np.asarray(edges[0]) == node
    if not mask.any():
        raise ValueError(f"node {node} has no incoming edges (missing self-loop?)")
    return alpha[mask]


def gat_layer_forward(
    layer: GatLayerParams, feats: np.ndarray, edges: EdgeArrays, slope: float = LEAKY_SLOPE
) -> np.ndarray:
    """One attention layer; outputs are sigmoid-bounded in (0, 1)."""
    if feats.shape[1] != layer.weight.shape[1]:
        raise ValueError(
            f"feature width {feats.shape[1]} does not match layer input {layer.weight.shape[1]}"
        )
    msg, s_dst, s_src = _edge_scores(layer, feats)
    out, _ = kernels.aggregate(msg, s_dst, s_src, edges[0], edges[1], feats.shape[0], slope)
    return _sigmoid(out)


def feed_forward(ff: FeedForwardParams, x: np.ndarray) -> np.ndarray:
    return np.tanh(x @ ff.w1.T + ff.b1) @ ff.w2.T + ff.b2


def encode_containers(graph: HierGraph, params: EncoderParams) -> np.ndarray:
    """Bottom-up encoding; returns one embedding row per container."""
    vm_in = graph.vm_feat
    if params.pm is not None:
        emb_pm = gat_layer_forward(params.pm, graph.pm_feat, graph.pm_edges)
        vm_in = np.concatenate([graph.vm_feat, emb_pm[graph.vm_host_pm]], axis=1)
    con_in = graph.con_feat
    if params.vm is not None:
        assert params.vm_ff is not None
        emb_vm = feed_forward(params.vm_ff, gat_layer_forward(params.vm, vm_in, graph.vm_edges))
        con_in = np.concatenate([graph.con_feat, emb_vm[graph.con_host_vm]], axis=1)
    hidden = gat_layer_forward(params.con1, con_in, graph.con_edges)
    hidden = gat_layer_forward(params.con2, hidden, graph.con_edges)
    return feed_forward(params.con_ff, hidden)
