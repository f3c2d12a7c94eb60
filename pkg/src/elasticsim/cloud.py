"""Domain model: microservice DAGs, machine catalog, and the closed-form
performance/cost formulas everything else is built on.

All types here are plain values; nothing in this module mutates shared
state, so instances can be handed freely across threads or processes.
Times are seconds unless a name says milliseconds; money is USD.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class ScenarioError(ValueError):
    """Invalid application, catalog, or scenario configuration."""


# ---------------------------------------------------------------------------
# Application model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Microservice:
    """One service type: ``et_ms`` is its task execution time at 1 vCPU."""

    id: int
    et_ms: float


@dataclass
class AppSpec:
    """A microservice application as a DAG of service types.

    Edges are ordered pairs of microservice ids.  Dummy start/end anchors are
    implicit: every node without predecessors is a root fed by the start
    anchor, every node without successors reaches the end anchor.
    """

    name: str
    microservices: list[Microservice]
    edges: list[tuple[int, int]]
    preds: dict[int, list[int]] = field(init=False, repr=False)
    succs: dict[int, list[int]] = field(init=False, repr=False)
    roots: list[int] = field(init=False, repr=False)
    leaves: list[int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ids = [ms.id for ms in self.microservices]
        if len(ids) != len(set(ids)):
            raise ScenarioError(f"app {self.name!r}: duplicate microservice ids")
        if not ids:
            raise ScenarioError(f"app {self.name!r}: no microservices")
        for ms in self.microservices:
            if ms.et_ms <= 0:
                raise ScenarioError(f"app {self.name!r}: microservice {ms.id} has non-positive et")
        known = set(ids)
        self.preds = {i: [] for i in ids}
        self.succs = {i: [] for i in ids}
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ScenarioError(f"app {self.name!r}: edge ({a}, {b}) references unknown microservice")
            if a == b:
                raise ScenarioError(f"app {self.name!r}: self-edge on microservice {a}")
            self.succs[a].append(b)
            self.preds[b].append(a)
        self._check_acyclic(ids)
        self.roots = [i for i in ids if not self.preds[i]]
        self.leaves = [i for i in ids if not self.succs[i]]

    def _check_acyclic(self, ids: list[int]) -> None:
        pending = {i: len(self.preds[i]) for i in ids}
        ready = [i for i in ids if pending[i] == 0]
        seen = 0
        while ready:
            node = ready.pop()
            seen += 1
            for nxt in self.succs[node]:
                pending[nxt] -= 1
                if pending[nxt] == 0:
                    ready.append(nxt)
        if seen != len(ids):
            raise ScenarioError(f"app {self.name!r}: dependency graph has a cycle")

    @property
    def ms_ids(self) -> list[int]:
        return [ms.id for ms in self.microservices]

    def et_of(self, ms_id: int) -> float:
        for ms in self.microservices:
            if ms.id == ms_id:
                return ms.et_ms
        raise KeyError(ms_id)

    @classmethod
    def from_dict(cls, doc: dict) -> "AppSpec":
        try:
            services = [Microservice(int(m["id"]), float(m["et_ms"])) for m in doc["microservices"]]
            edges = [(int(a), int(b)) for a, b in doc.get("edges", [])]
            return cls(name=str(doc.get("name", "app")), microservices=services, edges=edges)
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"malformed application document: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "AppSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "microservices": [{"id": ms.id, "et_ms": ms.et_ms} for ms in self.microservices],
            "edges": [list(e) for e in self.edges],
        }


# ---------------------------------------------------------------------------
# Machine catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VmType:
    name: str
    vcpu: int
    mem_gib: int
    usd_per_hour: float

    def __post_init__(self) -> None:
        if self.vcpu < 1 or self.mem_gib < 1 or self.usd_per_hour <= 0:
            raise ScenarioError(f"invalid VM type {self.name!r}")


# Amazon EC2 m5 on-demand pricing.
DEFAULT_VM_CATALOG: list[VmType] = [
    VmType("m5.xlarge", 4, 16, 0.192),
    VmType("m5.2xlarge", 8, 32, 0.384),
    VmType("m5.4xlarge", 16, 64, 0.768),
    VmType("m5.8xlarge", 32, 128, 1.536),
    VmType("m5.12xlarge", 48, 192, 2.304),
]

DEFAULT_PM_CPU = 64
DEFAULT_PM_MEM_GIB = 3200


def catalog_by_name(catalog: Sequence[VmType]) -> dict[str, VmType]:
    return {t.name: t for t in catalog}


# ---------------------------------------------------------------------------
# Per-request records
# ---------------------------------------------------------------------------

@dataclass
class TaskRecord:
    """Lifecycle of one task of one request on one container."""

    ms_id: int
    container_id: int | None = None
    enqueue_s: float | None = None
    start_s: float | None = None
    exec_s: float | None = None
    finish_s: float | None = None

    @property
    def wait_s(self) -> float | None:
        if self.start_s is None or self.enqueue_s is None:
            return None
        return self.start_s - self.enqueue_s


@dataclass
class WorkflowInstance:
    """One user request: a task per microservice, wired like the app DAG."""

    request_id: int
    arrival_s: float
    tasks: dict[int, TaskRecord]
    finish_s: float | None = None
    rejected: bool = False

    @property
    def response_ms(self) -> float | None:
        if self.finish_s is None:
            return None
        return (self.finish_s - self.arrival_s) * 1000.0


# ---------------------------------------------------------------------------
# Budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BudgetPolicy:
    """Rental budget for one evaluation horizon plus the overrun penalty."""

    budget_usd: float
    rho: float = 100.0
    horizon_steps: int = 480

    def __post_init__(self) -> None:
        if self.budget_usd <= 0:
            raise ScenarioError("budget must be positive")
        if self.rho < 0:
            raise ScenarioError("penalty coefficient must be non-negative")


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

def execution_time(et_ms: float, concpu: int) -> float:
    """Task execution time in ms when run on ``concpu`` vCPUs."""
    if et_ms <= 0:
        raise ValueError(f"execution time must be positive, got {et_ms}")
    if concpu < 1:
        raise ValueError(f"vCPU count must be at least 1, got {concpu}")
    return et_ms / concpu


def vm_cost(usd_per_hour: float, st_first_s: float, ft_last_s: float) -> float:
    """Rental fee for one VM over its active span (seconds in, USD out)."""
    if ft_last_s < st_first_s:
        raise ValueError(f"negative rental span: [{st_first_s}, {ft_last_s}]")
    return usd_per_hour * (ft_last_s - st_first_s) / 3600.0


def total_cost(vms: Iterable, horizon_end_s: float | None = None) -> float:
    """Sum of rental fees over VMs; never-activated machines contribute 0.

    Accepts anything with ``usd_per_hour``/``start_s``/``end_s`` attributes
    (``end_s`` of None means still active, billed up to ``horizon_end_s``).
    """
    acc = 0.0
    for vm in vms:
        start = getattr(vm, "start_s", None)
        if start is None:
            continue
        end = getattr(vm, "end_s", None)
        if end is None:
            if horizon_end_s is None:
                raise ValueError("horizon end required for still-active VMs")
            end = horizon_end_s
        price = getattr(vm, "usd_per_hour", None)
        if price is None:
            price = vm.vm_type.usd_per_hour
        acc += vm_cost(price, start, end)
    return acc


def average_response_time(responses_ms: Sequence[float]) -> float | None:
    """Arithmetic mean response time; ``None`` (never 0) when no requests."""
    if len(responses_ms) == 0:
        return None
    return math.fsum(responses_ms) / len(responses_ms)


def objective(art_ms: float, cost_usd: float, policy: BudgetPolicy) -> float:
    """Score to maximize: negated latency minus the budget-overrun penalty."""
    if art_ms < 0 or cost_usd < 0:
        raise ValueError("latency and cost must be non-negative")
    return -art_ms - policy.rho * max(0.0, cost_usd - policy.budget_usd)


def violation_degree(cost_usd: float, budget_usd: float) -> float:
    """Percentage of cost exceeding the budget (0 when within budget)."""
    if budget_usd <= 0:
        raise ValueError("budget must be positive")
    return max(0.0, cost_usd - budget_usd) / budget_usd * 100.0
