"""Three-layer state graph built from a simulator snapshot.

Layers: physical machines, VMs, containers.  Within-layer edges carry the
traffic structure (container edges follow the application DAG; machine
layers get an undirected edge whenever a container edge spans them), and
deployment edges tie each node to its host one layer down.  Every node also
gets a self-loop so attention neighbourhoods are never empty.

Raw per-node features are min-max normalised to [0, 1]; bounded quantities
use fixed scenario constants (max PM capacity, max catalog price) while
unbounded ones (latency, queue length, predicted load, accrued rental,
degree) divide by a running per-scenario maximum with a floor of 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import CloudState, cwrr_weights

PM_FEATURES = 2
VM_FEATURES = 5


def container_feature_count(ablate_zeta: bool = False) -> int:
    return 5 if ablate_zeta else 6


EdgeArrays = tuple[np.ndarray, np.ndarray]  # (dst, src), int64, self-loops included


@dataclass
class HierGraph:
    pm_ids: list[int]
    vm_ids: list[int]
    con_ids: list[int]
    pm_feat: np.ndarray
    vm_feat: np.ndarray
    con_feat: np.ndarray
    pm_edges: EdgeArrays
    vm_edges: EdgeArrays
    con_edges: EdgeArrays
    vm_host_pm: np.ndarray
    con_host_vm: np.ndarray

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.pm_ids), len(self.vm_ids), len(self.con_ids)

    def cross_edge_counts(self) -> tuple[int, int, int]:
        """Within-layer edge counts excluding self-loops (undirected pairs
        counted once for the machine layers)."""
        pm = (len(self.pm_edges[0]) - len(self.pm_ids)) // 2
        vm = (len(self.vm_edges[0]) - len(self.vm_ids)) // 2
        con = len(self.con_edges[0]) - len(self.con_ids)
        return pm, vm, con


class Normalizer:
    """Running per-scenario maxima for unbounded features (floor 1)."""

    def __init__(self) -> None:
        self._max: dict[str, float] = {}

    def observe(self, key: str, values: np.ndarray) -> None:
        peak = float(values.max()) if values.size else 0.0
        self._max[key] = max(self._max.get(key, 1.0), peak)

    def scale(self, key: str, values: np.ndarray) -> np.ndarray:
        return np.clip(values / self._max.get(key, 1.0), 0.0, 1.0)


def _with_self_loops(n: int, dst: list[int], src: list[int]) -> EdgeArrays:
    loops = list(range(n))
    return (
        np.asarray(loops + dst, dtype=np.int64),
        np.asarray(loops + src, dtype=np.int64),
    )


def build_graph(state: CloudState, norm: Normalizer, *, ablate_zeta: bool = False) -> HierGraph:
    """Snapshot the deployment as a hierarchical graph with normalised
    features.  Raises KeyError on dangling deployment references."""
    con_ids = list(state.container_order)
    cons = [state.containers[c] for c in con_ids]
    vm_ids = sorted(state.vms)
    pm_ids = [pm.id for pm in state.pms]
    con_row = {c: i for i, c in enumerate(con_ids)}
    vm_row = {v: i for i, v in enumerate(vm_ids)}
    pm_row = {p: i for i, p in enumerate(pm_ids)}

    con_host_vm = np.asarray([vm_row[c.vm_id] for c in cons], dtype=np.int64)
    vm_host_pm = np.asarray([pm_row[state.vms[v].pm_id] for v in vm_ids], dtype=np.int64)

    by_ms: dict[int, list[int]] = {}
    for c in cons:
        by_ms.setdefault(c.ms_id, []).append(c.id)

    con_dst: list[int] = []
    con_src: list[int] = []
    degree = np.zeros(len(cons), dtype=np.float64)
    vm_pairs: set[tuple[int, int]] = set()
    pm_pairs: set[tuple[int, int]] = set()
    for a_ms, b_ms in state.app.edges:
        for ca in by_ms.get(a_ms, []):
            for cb in by_ms.get(b_ms, []):
                ra, rb = con_row[ca], con_row[cb]
                con_dst.append(rb)
                con_src.append(ra)
                degree[ra] += 1
                degree[rb] += 1
                va = state.containers[ca].vm_id
                vb = state.containers[cb].vm_id
                if va != vb:
                    vm_pairs.add((min(va, vb), max(va, vb)))
                    pa = state.vms[va].pm_id
                    pb = state.vms[vb].pm_id
                    if pa != pb:
                        pm_pairs.add((min(pa, pb), max(pa, pb)))

    vm_dst: list[int] = []
    vm_src: list[int] = []
    for u, v in sorted(vm_pairs):
        ru, rv = vm_row[u], vm_row[v]
        vm_dst.extend((ru, rv))
        vm_src.extend((rv, ru))
    pm_dst: list[int] = []
    pm_src: list[int] = []
    for u, v in sorted(pm_pairs):
        ru, rv = pm_row[u], pm_row[v]
        pm_dst.extend((ru, rv))
        pm_src.extend((rv, ru))

    pm_cap = float(max(pm.cpu_capacity for pm in state.pms))
    price_cap = max(t.usd_per_hour for t in state.cluster.vm_catalog)

    pm_util = np.asarray([state.pm_window_util.get(p, 0.0) for p in pm_ids])
    pm_feat = np.column_stack([
        pm_util,
        np.asarray([pm.cpu_capacity for pm in state.pms], dtype=np.float64) / pm_cap,
    ])

    vm_objs = [state.vms[v] for v in vm_ids]
    vm_util = np.asarray([state.vm_window_util.get(v, 0.0) for v in vm_ids])
    vm_rental = np.asarray([vm.rental(state.clock) for vm in vm_objs])
    vm_art = np.asarray([state.vm_window_art.get(v, 0.0) for v in vm_ids])
    norm.observe("rental", vm_rental)
    norm.observe("art_vm", vm_art)
    vm_feat = np.column_stack([
        vm_util,
        np.asarray([vm.vcpu for vm in vm_objs]) / pm_cap,
        np.asarray([vm.usd_per_hour for vm in vm_objs]) / price_cap,
        norm.scale("rental", vm_rental),
        norm.scale("art_vm", vm_art),
    ])

    predicted = np.zeros(len(cons))
    for ms_id, members in by_ms.items():
        sma = state.predict_ms_workload(ms_id)
        active = [c for c in state.dispatchable_containers(ms_id)]
        if not active:
            continue
        weights = cwrr_weights([c.effective_vcpus for c in active])
        share = dict(zip((c.id for c in active), weights))
        for cid in members:
            predicted[con_row[cid]] = sma * share.get(cid, 0.0)
    zeta = np.asarray([state.vms[c.vm_id].remaining_vcpu for c in cons], dtype=np.float64)
    pending = np.asarray([len(c.queue) for c in cons], dtype=np.float64)
    con_art = np.asarray([c.last_art_ms for c in cons])
    norm.observe("degree", degree)
    norm.observe("pending", pending)
    norm.observe("art_con", con_art)
    norm.observe("predicted", predicted)
    columns = [
        np.asarray([c.vcpus for c in cons], dtype=np.float64) / pm_cap,
    ]
    if not ablate_zeta:
        columns.append(zeta / pm_cap)
    columns.extend([
        norm.scale("degree", degree),
        norm.scale("pending", pending),
        norm.scale("art_con", con_art),
        norm.scale("predicted", predicted),
    ])
    con_feat = np.column_stack(columns) if cons else np.empty((0, container_feature_count(ablate_zeta)))

    return HierGraph(
        pm_ids=pm_ids,
        vm_ids=vm_ids,
        con_ids=con_ids,
        pm_feat=np.asarray(pm_feat, dtype=np.float64),
        vm_feat=np.asarray(vm_feat, dtype=np.float64) if vm_ids else np.empty((0, VM_FEATURES)),
        con_feat=np.asarray(con_feat, dtype=np.float64),
        pm_edges=_with_self_loops(len(pm_ids), pm_dst, pm_src),
        vm_edges=_with_self_loops(len(vm_ids), vm_dst, vm_src),
        con_edges=_with_self_loops(len(con_ids), con_dst, con_src),
        vm_host_pm=vm_host_pm,
        con_host_vm=con_host_vm,
    )


def dump_edges(graph: HierGraph) -> str:
    """Human-readable edge list (self-loops omitted) for debugging."""
    lines: list[str] = []
    p, v, c = graph.counts
    for dst, src in zip(*graph.pm_edges):
        if dst != src:
            lines.append(f"pm {graph.pm_ids[src]} -- pm {graph.pm_ids[dst]}")
    for dst, src in zip(*graph.vm_edges):
        if dst != src:
            lines.append(f"vm {graph.vm_ids[src]} -- vm {graph.vm_ids[dst]}")
    for dst, src in zip(*graph.con_edges):
        if dst != src:
            lines.append(f"con {graph.con_ids[src]} -> con {graph.con_ids[dst]}")
    for row, pm in enumerate(graph.vm_host_pm):
        lines.append(f"pm {graph.pm_ids[pm]} => vm {graph.vm_ids[row]}")
    for row, vm in enumerate(graph.con_host_vm):
        lines.append(f"vm {graph.vm_ids[vm]} => con {graph.con_ids[row]}")
    return "\n".join(lines)
