"""Edge-softmax aggregation kernels for the graph attention layers.

This is the hot inner loop of the autoscaler: it runs once per layer per
decision step, and during training that multiplies out to millions of calls.
Two interchangeable implementations are provided:

* a numba ``@njit`` kernel (default when numba is importable), and
* a pure-numpy scatter implementation used as fallback.

Set ``ELASTICSIM_BACKEND=numpy`` to force the numpy path or
``ELASTICSIM_BACKEND=numba`` to fail loudly when numba is unavailable.
``benchmarks/bench_gat.py`` compares the two.

For every node ``i`` with incoming edges ``(i, j)``:

    score(i, j) = leaky_relu(s_dst[i] + s_src[j])
    alpha(i, j) = softmax_j(score(i, j))          (max-shifted for stability)
    out[i]      = sum_j alpha(i, j) * msg[j]

Every node must carry a self-loop so no softmax denominator is empty.
"""

from __future__ import annotations

import os

import numpy as np

_REQUESTED = os.environ.get("ELASTICSIM_BACKEND", "").strip().lower()
if _REQUESTED not in ("", "numpy", "numba"):
    raise RuntimeError(f"unknown ELASTICSIM_BACKEND value: {_REQUESTED!r}")


def _aggregate_numpy(msg, s_dst, s_src, edge_dst, edge_src, num_nodes, slope):
    raw = s_dst[edge_dst] + s_src[edge_src]
    score = np.where(raw > 0.0, raw, slope * raw)
    peak = np.full(num_nodes, -np.inf)
    np.maximum.at(peak, edge_dst, score)
    weight = np.exp(score - peak[edge_dst])
    denom = np.zeros(num_nodes)
    np.add.at(denom, edge_dst, weight)
    alpha = weight / denom[edge_dst]
    out = np.zeros((num_nodes, msg.shape[1]))
    np.add.at(out, edge_dst, alpha[:, None] * msg[edge_src])
    return out, alpha


_aggregate_numba = None
if _REQUESTED != "numpy":
    try:
        import numba

        @numba.njit(cache=True)
        def _aggregate_numba(msg, s_dst, s_src, edge_dst, edge_src, num_nodes, slope):  # noqa: F811
            n_edges = edge_dst.shape[0]
            width = msg.shape[1]
            score = np.empty(n_edges)
            for e in range(n_edges):
                s = s_dst[edge_dst[e]] + s_src[edge_src[e]]
                score[e] = s if s > 0.0 else slope * s
            peak = np.full(num_nodes, -np.inf)
            for e in range(n_edges):
                d = edge_dst[e]
                if score[e] > peak[d]:
                    peak[d] = score[e]
            weight = np.empty(n_edges)
            denom = np.zeros(num_nodes)
            for e in range(n_edges):
                w = np.exp(score[e] - peak[edge_dst[e]])
                weight[e] = w
                denom[edge_dst[e]] += w
            alpha = np.empty(n_edges)
            out = np.zeros((num_nodes, width))
            for e in range(n_edges):
                a = weight[e] / denom[edge_dst[e]]
                alpha[e] = a
                d = edge_dst[e]
                s = edge_src[e]
                for f in range(width):
                    out[d, f] += a * msg[s, f]
            return out, alpha

    except ImportError:
        if _REQUESTED == "numba":
            raise RuntimeError("ELASTICSIM_BACKEND=numba but numba is not installed")
        _aggregate_numba = None

BACKEND = "numba" if _aggregate_numba is not None else "numpy"


def aggregate(msg, s_dst, s_src, edge_dst, edge_src, num_nodes, slope):
    """Attention-weighted neighbourhood sum; returns ``(out, alpha)``.

    ``msg`` is the (N, F) matrix of transformed node features, ``s_dst`` /
    ``s_src`` the per-node score halves, and ``edge_dst`` / ``edge_src`` the
    int64 endpoint arrays (destination aggregates from source).
    """
    msg = np.ascontiguousarray(msg, dtype=np.float64)
    s_dst = np.ascontiguousarray(s_dst, dtype=np.float64)
    s_src = np.ascontiguousarray(s_src, dtype=np.float64)
    edge_dst = np.ascontiguousarray(edge_dst, dtype=np.int64)
    edge_src = np.ascontiguousarray(edge_src, dtype=np.int64)
    if _aggregate_numba is not None:
        return _aggregate_numba(msg, s_dst, s_src, edge_dst, edge_src, num_nodes, slope)
    return _aggregate_numpy(msg, s_dst, s_src, edge_dst, edge_src, num_nodes, slope)
