"""Discrete-event simulation of a microservice application on rented machines.

A single event heap drives everything: request arrivals, task completions,
delayed vertical capacity changes, and container activations.  Events are
ordered by ``(timestamp, push sequence)``, dispatch uses smooth weighted
round-robin, and the only random quantity (arrival jitter) comes from a
counter-keyed generator — so a run is a pure function of its inputs.

Clock and event times are seconds.  Task execution times are milliseconds in
the application model and converted when scheduled.  One decision step spans
``decision_interval_s`` (default 180 s) and ends with per-window busy-time and
latency accounting that feeds the state features of the next decision.

Capacity bookkeeping distinguishes *allocated* vCPUs (reserved on the host VM
the moment an action executes, so capacity invariants always hold) from
*effective* vCPUs (what running tasks and dispatch weights see).  Vertical
increases become effective after ``vertical_delay_s``; decreases apply
immediately.  New containers receive dispatches only after
``horizontal_delay_s``.
"""

from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from .cloud import (
    DEFAULT_PM_CPU,
    DEFAULT_PM_MEM_GIB,
    DEFAULT_VM_CATALOG,
    AppSpec,
    ScenarioError,
    TaskRecord,
    VmType,
    WorkflowInstance,
    catalog_by_name,
    execution_time,
    vm_cost,
)
from .workload import WorkloadHistory, arrivals_in_step, sma_predict

if TYPE_CHECKING:
    from .executor import ScalingAction

log = logging.getLogger(__name__)

_ARRIVAL, _FINISH, _RESIZE, _ACTIVATE = 0, 1, 2, 3

# StepMetrics folds fine-grained executor outcomes into three reporting kinds.
ACTION_KINDS = ("vertical", "horizontal", "noop")


class InvariantError(RuntimeError):
    """A capacity or accounting invariant was violated (simulator bug)."""


@dataclass(frozen=True)
class TransientConfig:
    """Delay between issuing a scaling operation and the capacity change."""

    horizontal_delay_s: float = 30.0
    vertical_delay_s: float = 1.0

    def __post_init__(self) -> None:
        if self.horizontal_delay_s < 0 or self.vertical_delay_s < 0:
            raise ScenarioError("transient delays must be non-negative")

    @classmethod
    def worst_case(cls) -> "TransientConfig":
        # replica boot up to 3 minutes, in-place resize up to 10 s
        return cls(horizontal_delay_s=180.0, vertical_delay_s=10.0)


@dataclass
class ClusterConfig:
    """Machine pool and deployment layout for one scenario."""

    vm_catalog: list[VmType] = field(default_factory=lambda: list(DEFAULT_VM_CATALOG))
    pm_cpu: int = DEFAULT_PM_CPU
    pm_mem_gib: int = DEFAULT_PM_MEM_GIB
    pm_count: int = 8
    initial_vm_type: str = "m5.4xlarge"
    initial_vm_count: int = 3
    decision_interval_s: float = 180.0
    transient: TransientConfig = field(default_factory=TransientConfig)
    sma_window: int = 5

    def __post_init__(self) -> None:
        if self.pm_count < 1 or self.initial_vm_count < 1:
            raise ScenarioError("need at least one PM and one initial VM")
        if self.decision_interval_s <= 0:
            raise ScenarioError("decision interval must be positive")
        if self.initial_vm_type not in catalog_by_name(self.vm_catalog):
            raise ScenarioError(f"initial VM type {self.initial_vm_type!r} not in catalog")


@dataclass
class StepMetrics:
    """Accounting for one decision step."""

    step: int
    arrivals: int
    rejected: int
    completed: int
    art_ms: float | None
    cumulative_cost: float
    action_kind: str
    containers: int
    vms: int
    in_flight: int


class Pm:
    __slots__ = ("id", "cpu_capacity", "mem_gib", "used_vcpu", "used_mem")

    def __init__(self, pm_id: int, cpu_capacity: int, mem_gib: int):
        self.id = pm_id
        self.cpu_capacity = cpu_capacity
        self.mem_gib = mem_gib
        self.used_vcpu = 0
        self.used_mem = 0

    def fits(self, vm_type: VmType) -> bool:
        return (
            self.used_vcpu + vm_type.vcpu <= self.cpu_capacity
            and self.used_mem + vm_type.mem_gib <= self.mem_gib
        )


class Vm:
    __slots__ = ("id", "vm_type", "pm_id", "start_s", "end_s", "used_vcpu",
                 "container_ids", "empty_since")

    def __init__(self, vm_id: int, vm_type: VmType, pm_id: int, start_s: float):
        self.id = vm_id
        self.vm_type = vm_type
        self.pm_id = pm_id
        self.start_s = start_s
        self.end_s: float | None = None
        self.used_vcpu = 0
        self.container_ids: set[int] = set()
        self.empty_since: float | None = start_s

    @property
    def vcpu(self) -> int:
        return self.vm_type.vcpu

    @property
    def usd_per_hour(self) -> float:
        return self.vm_type.usd_per_hour

    @property
    def remaining_vcpu(self) -> int:
        return self.vm_type.vcpu - self.used_vcpu

    def rental(self, now_s: float) -> float:
        return vm_cost(self.usd_per_hour, self.start_s, self.end_s if self.end_s is not None else now_s)


class Container:
    __slots__ = ("id", "ms_id", "vm_id", "vcpus", "effective_vcpus", "active_at",
                 "draining", "queue", "running", "running_start", "running_vcpus",
                 "win_busy_s", "win_busy_vcpu_s", "win_sojourn_sum", "win_sojourn_n",
                 "last_util", "last_art_ms", "created_s")

    def __init__(self, con_id: int, ms_id: int, vm_id: int, vcpus: int,
                 active_at: float, created_s: float):
        self.id = con_id
        self.ms_id = ms_id
        self.vm_id = vm_id
        self.vcpus = vcpus                 # allocated on the host VM
        self.effective_vcpus = vcpus       # what tasks and dispatch see
        self.active_at = active_at
        self.draining = False
        self.queue: deque[tuple[int, int]] = deque()  # (request_id, ms_id)
        self.running: tuple[int, int] | None = None
        self.running_start = 0.0
        self.running_vcpus = 0
        self.win_busy_s = 0.0
        self.win_busy_vcpu_s = 0.0
        self.win_sojourn_sum = 0.0
        self.win_sojourn_n = 0
        self.last_util = 0.0
        self.last_art_ms = 0.0
        self.created_s = created_s

    def is_dispatchable(self, now_s: float) -> bool:
        return not self.draining and now_s >= self.active_at


def cwrr_weights(vcpus: "np.ndarray | list[float]") -> np.ndarray:
    """Dispatch weights proportional to each replica's vCPU allocation."""
    arr = np.asarray(vcpus, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no containers to weight")
    total = arr.sum()
    if total <= 0:
        raise ValueError("total capacity must be positive")
    return arr / total


class SmoothWrr:
    """Deterministic weighted round-robin with bounded drift.

    Each pick adds every candidate's weight to its credit, selects the
    highest credit (ties to the lowest id), and charges the winner one unit.
    Over any run of n picks with stable weights, each candidate is chosen
    between floor(n*w) and ceil(n*w) times.
    """

    def __init__(self) -> None:
        self._credit: dict[int, float] = {}

    def pick(self, ids: list[int], weights: np.ndarray) -> int:
        credit = self._credit
        live = set(ids)
        for stale in [k for k in credit if k not in live]:
            del credit[stale]
        best_id = -1
        best_credit = -np.inf
        for cid, w in zip(ids, weights):
            c = credit.get(cid, 0.0) + float(w)
            credit[cid] = c
            if c > best_credit:
                best_credit = c
                best_id = cid
        credit[best_id] -= 1.0
        return best_id


class CloudState:
    """Full mutable simulator state plus the event loop that advances it.

    One instance is strictly single-threaded; parallel evaluation uses
    share-nothing replicas built from the same scenario.
    """

    def __init__(self, app: AppSpec, cluster: ClusterConfig):
        self.app = app
        self.cluster = cluster
        self._et = {ms.id: ms.et_ms for ms in app.microservices}
        self.clock = 0.0
        self.pms: list[Pm] = []
        self.vms: dict[int, Vm] = {}
        self.released_vms: list[Vm] = []
        self.containers: dict[int, Container] = {}
        self.container_order: list[int] = []   # live, non-draining, creation order
        self._draining: dict[int, Container] = {}
        self._events: list[tuple[float, int, int, object]] = []
        self._seq = 0
        self._next_con_id = 0
        self._next_vm_id = 0
        self.workflows: dict[int, WorkflowInstance] = {}
        self._wf_pred_left: dict[int, dict[int, int]] = {}
        self._wf_leaves_left: dict[int, int] = {}
        self._live_wf: set[int] = set()
        self.arrived = 0
        self.completed = 0
        self.rejected = 0
        self.responses_ms: list[float] = []
        self._step_responses: list[float] = []
        self.histories: dict[int, WorkloadHistory] = {
            ms: WorkloadHistory(cluster.sma_window) for ms in app.ms_ids
        }
        self._wrr: dict[int, SmoothWrr] = {ms: SmoothWrr() for ms in app.ms_ids}
        self.window_start = 0.0
        self.step_index = 0
        self.steps_completed = 0
        self.action_counts = {k: 0 for k in ACTION_KINDS}
        self.vm_window_util: dict[int, float] = {}
        self.vm_window_art: dict[int, float] = {}
        self.pm_window_util: dict[int, float] = {}
        self.trace_counts: np.ndarray | None = None
        self.jitter_seed: int | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def init_scenario(cls, app: AppSpec, cluster: ClusterConfig) -> "CloudState":
        """Initial deployment: one 1-vCPU container per microservice,
        placed round-robin over the configured initial VMs."""
        state = cls(app, cluster)
        for i in range(cluster.pm_count):
            state.pms.append(Pm(i, cluster.pm_cpu, cluster.pm_mem_gib))
        vm_type = catalog_by_name(cluster.vm_catalog)[cluster.initial_vm_type]
        initial_vms: list[Vm] = []
        for _ in range(cluster.initial_vm_count):
            vm = state.rent_vm(vm_type)
            if vm is None:
                raise ScenarioError("initial VMs do not fit on the configured PMs")
            initial_vms.append(vm)
        for idx, ms in enumerate(app.microservices):
            vm = initial_vms[idx % len(initial_vms)]
            if vm.remaining_vcpu < 1:
                raise ScenarioError(
                    f"initial deployment exceeds VM capacity ({len(app.microservices)} "
                    f"containers over {len(initial_vms)} x {vm_type.name})"
                )
            state.create_container(ms.id, 1, vm, delay=False)
        return state

    def bind_trace(self, counts: np.ndarray, jitter_seed: int | None = None) -> None:
        self.trace_counts = np.asarray(counts, dtype=np.int64)
        self.jitter_seed = jitter_seed

    # -- event plumbing -----------------------------------------------------

    def _push(self, when: float, kind: int, payload: object) -> None:
        self._seq += 1
        heapq.heappush(self._events, (when, self._seq, kind, payload))

    # -- machine management -------------------------------------------------

    def find_pm_for(self, vm_type: VmType) -> Pm | None:
        for pm in self.pms:
            if pm.fits(vm_type):
                return pm
        return None

    def rent_vm(self, vm_type: VmType) -> Vm | None:
        pm = self.find_pm_for(vm_type)
        if pm is None:
            return None
        vm = Vm(self._next_vm_id, vm_type, pm.id, self.clock)
        self._next_vm_id += 1
        pm.used_vcpu += vm_type.vcpu
        pm.used_mem += vm_type.mem_gib
        self.vms[vm.id] = vm
        return vm

    def _release_vm(self, vm: Vm) -> None:
        vm.end_s = self.clock
        pm = self.pms[vm.pm_id]
        pm.used_vcpu -= vm.vcpu
        pm.used_mem -= vm.vm_type.mem_gib
        del self.vms[vm.id]
        self.released_vms.append(vm)

    def create_container(self, ms_id: int, vcpus: int, vm: Vm, *, delay: bool = True) -> Container:
        if vcpus < 1:
            raise ValueError("containers need at least 1 vCPU")
        if vm.remaining_vcpu < vcpus:
            raise InvariantError(f"VM {vm.id} cannot host {vcpus} more vCPUs")
        active_at = self.clock + (self.cluster.transient.horizontal_delay_s if delay else 0.0)
        con = Container(self._next_con_id, ms_id, vm.id, vcpus, active_at, self.clock)
        self._next_con_id += 1
        vm.used_vcpu += vcpus
        vm.container_ids.add(con.id)
        vm.empty_since = None
        self.containers[con.id] = con
        self.container_order.append(con.id)
        if delay and self.cluster.transient.horizontal_delay_s > 0:
            self._push(active_at, _ACTIVATE, con.id)
        return con

    def resize_container(self, con: Container, delta: int) -> None:
        """Adjust allocation now; increases become effective after the
        vertical delay, decreases take effect immediately."""
        if delta == 0:
            return
        vm = self.vms[con.vm_id]
        new_vcpus = con.vcpus + delta
        if new_vcpus < 1:
            raise InvariantError(f"container {con.id} would drop below 1 vCPU")
        if delta > 0 and vm.remaining_vcpu < delta:
            raise InvariantError(f"VM {vm.id} lacks {delta} spare vCPUs")
        vm.used_vcpu += delta
        con.vcpus = new_vcpus
        if delta < 0:
            con.effective_vcpus = min(con.effective_vcpus, new_vcpus)
        else:
            delay = self.cluster.transient.vertical_delay_s
            if delay <= 0:
                con.effective_vcpus = new_vcpus
            else:
                self._push(self.clock + delay, _RESIZE, (con.id, new_vcpus))

    def delete_container(self, con: Container) -> None:
        """Remove a replica: stop dispatching to it, re-dispatch its queued
        tasks to surviving replicas, and free capacity once it is idle."""
        con.draining = True
        self.container_order.remove(con.id)
        self._draining[con.id] = con
        pending = list(con.queue)
        con.queue.clear()
        for request_id, ms_id in pending:
            self._dispatch(request_id, ms_id)
        if con.running is None:
            self._dealloc(con)

    def _dealloc(self, con: Container) -> None:
        vm = self.vms[con.vm_id]
        vm.used_vcpu -= con.vcpus
        vm.container_ids.discard(con.id)
        if not vm.container_ids:
            vm.empty_since = self.clock
        self._draining.pop(con.id, None)
        del self.containers[con.id]

    # -- dispatch -----------------------------------------------------------

    def dispatchable_containers(self, ms_id: int) -> list[Container]:
        return [
            self.containers[cid]
            for cid in self.container_order
            if self.containers[cid].ms_id == ms_id
            and self.containers[cid].is_dispatchable(self.clock)
        ]

    def live_containers(self, ms_id: int) -> list[Container]:
        return [
            self.containers[cid]
            for cid in self.container_order
            if self.containers[cid].ms_id == ms_id
        ]

    def ms_weights(self, ms_id: int) -> tuple[list[Container], np.ndarray]:
        cons = self.dispatchable_containers(ms_id)
        if not cons:
            return [], np.empty(0)
        return cons, cwrr_weights([c.effective_vcpus for c in cons])

    def dispatch_task(self, request_id: int, ms_id: int) -> int | None:
        """Queue one task on a replica chosen by weighted round-robin;
        returns the container id or None when no replica can serve."""
        return self._dispatch(request_id, ms_id)

    def _dispatch(self, request_id: int, ms_id: int) -> int | None:
        cons, weights = self.ms_weights(ms_id)
        if not cons:
            self._reject_workflow(request_id, ms_id)
            return None
        chosen = self._wrr[ms_id].pick([c.id for c in cons], weights)
        con = self.containers[chosen]
        wf = self.workflows[request_id]
        task = wf.tasks[ms_id]
        task.container_id = con.id
        task.enqueue_s = self.clock
        con.queue.append((request_id, ms_id))
        self._try_start(con)
        return con.id

    def _reject_workflow(self, request_id: int, ms_id: int) -> None:
        wf = self.workflows[request_id]
        if not wf.rejected:
            wf.rejected = True
            self.rejected += 1
            self._live_wf.discard(request_id)
            self._wf_pred_left.pop(request_id, None)
            self._wf_leaves_left.pop(request_id, None)
            log.warning("request %d rejected: no replica for microservice %d", request_id, ms_id)

    def _try_start(self, con: Container) -> None:
        if con.running is not None or not con.queue or self.clock < con.active_at:
            return
        request_id, ms_id = con.queue.popleft()
        task = self.workflows[request_id].tasks[ms_id]
        eff = con.effective_vcpus
        et_ms = execution_time(self._et[ms_id], eff)
        task.start_s = self.clock
        task.exec_s = et_ms / 1000.0
        con.running = (request_id, ms_id)
        con.running_start = self.clock
        con.running_vcpus = eff
        self._push(self.clock + task.exec_s, _FINISH, con.id)

    # -- event handlers -----------------------------------------------------

    def _admit(self, arrival_s: float) -> None:
        request_id = self.arrived
        self.arrived += 1
        wf = WorkflowInstance(
            request_id=request_id,
            arrival_s=arrival_s,
            tasks={ms: TaskRecord(ms_id=ms) for ms in self.app.ms_ids},
        )
        self.workflows[request_id] = wf
        for ms in self.app.ms_ids:
            if not self.dispatchable_containers(ms):
                wf.rejected = True
                self.rejected += 1
                log.warning("request %d rejected on arrival: microservice %d has no replica",
                            request_id, ms)
                return
        self._live_wf.add(request_id)
        self._wf_pred_left[request_id] = {
            ms: len(self.app.preds[ms]) for ms in self.app.ms_ids
        }
        self._wf_leaves_left[request_id] = len(self.app.leaves)
        for ms in self.app.roots:
            self._dispatch(request_id, ms)

    def _handle_finish(self, con: Container) -> None:
        request_id, ms_id = con.running  # type: ignore[misc]
        wf = self.workflows[request_id]
        task = wf.tasks[ms_id]
        task.finish_s = self.clock
        seg_start = max(con.running_start, self.window_start)
        span = self.clock - seg_start
        con.win_busy_s += span
        con.win_busy_vcpu_s += span * con.running_vcpus
        con.win_sojourn_sum += (self.clock - task.enqueue_s) * 1000.0
        con.win_sojourn_n += 1
        con.running = None
        if not wf.rejected:
            left = self._wf_pred_left[request_id]
            for succ in self.app.succs[ms_id]:
                left[succ] -= 1
                if left[succ] == 0:
                    self._dispatch(request_id, succ)
            if not self.app.succs[ms_id]:
                self._wf_leaves_left[request_id] -= 1
                if self._wf_leaves_left[request_id] == 0:
                    self._complete_workflow(wf)
        if con.draining:
            if con.running is None and not con.queue:
                self._dealloc(con)
            return
        self._try_start(con)

    def _complete_workflow(self, wf: WorkflowInstance) -> None:
        wf.finish_s = self.clock
        self._live_wf.discard(wf.request_id)
        self.completed += 1
        rt = wf.response_ms
        assert rt is not None
        self.responses_ms.append(rt)
        self._step_responses.append(rt)
        self._wf_pred_left.pop(wf.request_id, None)
        self._wf_leaves_left.pop(wf.request_id, None)

    # -- time advance -------------------------------------------------------

    def advance(self, until_s: float) -> list[float]:
        """Process all events up to ``until_s``; returns response times (ms)
        of requests completed during the call."""
        if until_s < self.clock:
            raise ValueError("cannot advance backwards")
        completed_before = len(self.responses_ms)
        events = self._events
        while events and events[0][0] <= until_s:
            when, _, kind, payload = heapq.heappop(events)
            self.clock = when
            if kind == _ARRIVAL:
                self._admit(when)
            elif kind == _FINISH:
                con = self.containers.get(payload)  # type: ignore[arg-type]
                if con is not None and con.running is not None:
                    self._handle_finish(con)
            elif kind == _RESIZE:
                con_id, target = payload  # type: ignore[misc]
                con = self.containers.get(con_id)
                if con is not None:
                    con.effective_vcpus = min(con.vcpus, max(con.effective_vcpus, target))
            elif kind == _ACTIVATE:
                con = self.containers.get(payload)  # type: ignore[arg-type]
                if con is not None:
                    self._try_start(con)
        self.clock = until_s
        return self.responses_ms[completed_before:]

    # -- decision steps -----------------------------------------------------

    def env_step(self, action: "ScalingAction") -> StepMetrics:
        """Apply one scaling action, admit the step's arrivals, advance one
        decision interval, and account the step."""
        from .executor import execute_action, fold_kind

        ops = execute_action(self, action)
        return self._step_common(fold_kind(ops.kind))

    def direct_step(self, apply_fn: Callable[["CloudState"], str]) -> StepMetrics:
        """Like ``env_step`` but for policies that edit the deployment
        directly (threshold/prediction heuristics); ``apply_fn`` returns the
        folded action kind for accounting."""
        kind = apply_fn(self)
        if kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {kind!r}")
        return self._step_common(kind)

    def _step_common(self, action_kind: str) -> StepMetrics:
        from .executor import release_idle_vms

        interval = self.cluster.decision_interval_s
        self.window_start = self.clock
        self._step_responses = []
        arrived_before = self.arrived
        rejected_before = self.rejected
        arrivals = np.empty(0)
        if self.trace_counts is not None and self.step_index < self.trace_counts.size:
            arrivals = arrivals_in_step(
                self.trace_counts,
                self.step_index,
                interval_s=interval,
                jitter_seed=self.jitter_seed,
            )
        for t in arrivals:
            self._push(float(t), _ARRIVAL, None)
        self.advance(self.clock + interval)
        release_idle_vms(self)
        self._roll_window()
        step_count = self.arrived - arrived_before
        for ms in self.app.ms_ids:
            self.histories[ms].push(step_count)
        self.action_counts[action_kind] += 1
        completed_step = len(self._step_responses)
        art = None
        if completed_step:
            art = sum(self._step_responses) / completed_step
        metrics = StepMetrics(
            step=self.step_index,
            arrivals=step_count,
            rejected=self.rejected - rejected_before,
            completed=completed_step,
            art_ms=art,
            cumulative_cost=self.current_cost(),
            action_kind=action_kind,
            containers=len(self.container_order),
            vms=len(self.vms),
            in_flight=len(self._live_wf),
        )
        self.step_index += 1
        self.steps_completed += 1
        return metrics

    def _roll_window(self) -> None:
        """Close the utilisation/latency window at a step boundary."""
        interval = self.cluster.decision_interval_s
        boundary = self.clock
        vm_busy: dict[int, float] = {vm_id: 0.0 for vm_id in self.vms}
        vm_soj: dict[int, tuple[float, int]] = {vm_id: (0.0, 0) for vm_id in self.vms}
        all_cons = list(self.containers.values())
        for con in all_cons:
            if con.running is not None:
                seg_start = max(con.running_start, self.window_start)
                span = boundary - seg_start
                con.win_busy_s += span
                con.win_busy_vcpu_s += span * con.running_vcpus
            con.last_util = min(1.0, con.win_busy_s / interval)
            con.last_art_ms = (
                con.win_sojourn_sum / con.win_sojourn_n if con.win_sojourn_n else 0.0
            )
            if con.vm_id in vm_busy:
                vm_busy[con.vm_id] += con.win_busy_vcpu_s
                s, n = vm_soj[con.vm_id]
                vm_soj[con.vm_id] = (s + con.win_sojourn_sum, n + con.win_sojourn_n)
            con.win_busy_s = 0.0
            con.win_busy_vcpu_s = 0.0
            con.win_sojourn_sum = 0.0
            con.win_sojourn_n = 0
        self.vm_window_util = {}
        self.vm_window_art = {}
        pm_busy: dict[int, float] = {pm.id: 0.0 for pm in self.pms}
        for vm_id, busy in vm_busy.items():
            vm = self.vms[vm_id]
            self.vm_window_util[vm_id] = min(1.0, busy / (vm.vcpu * interval))
            s, n = vm_soj[vm_id]
            self.vm_window_art[vm_id] = s / n if n else 0.0
            pm_busy[vm.pm_id] += busy
        self.pm_window_util = {
            pm.id: min(1.0, pm_busy[pm.id] / (pm.cpu_capacity * interval)) for pm in self.pms
        }

    # -- accounting ---------------------------------------------------------

    def current_cost(self) -> float:
        acc = 0.0
        for vm in self.vms.values():
            acc += vm.rental(self.clock)
        for vm in self.released_vms:
            acc += vm.rental(self.clock)
        return acc

    def predict_ms_workload(self, ms_id: int) -> float:
        history = self.histories[ms_id]
        if len(history) == 0:
            return 0.0
        return sma_predict(history)

    def queued_tasks(self) -> int:
        return sum(len(c.queue) + (1 if c.running else 0) for c in self.containers.values())

    def conservation_holds(self) -> bool:
        return self.arrived == self.completed + len(self._live_wf) + self.rejected

    def validate(self) -> None:
        """Raise InvariantError on any capacity/accounting violation."""
        for vm in self.vms.values():
            hosted = sum(self.containers[c].vcpus for c in vm.container_ids)
            if hosted != vm.used_vcpu:
                raise InvariantError(f"VM {vm.id} allocation ledger out of sync")
            if vm.used_vcpu > vm.vcpu:
                raise InvariantError(f"VM {vm.id} over capacity: {vm.used_vcpu}/{vm.vcpu}")
        for pm in self.pms:
            hosted = sum(vm.vcpu for vm in self.vms.values() if vm.pm_id == pm.id)
            if hosted != pm.used_vcpu:
                raise InvariantError(f"PM {pm.id} allocation ledger out of sync")
            if pm.used_vcpu > pm.cpu_capacity:
                raise InvariantError(f"PM {pm.id} over capacity")
        for cid in self.container_order:
            con = self.containers[cid]
            if con.vm_id not in self.vms:
                raise InvariantError(f"container {cid} hosted on unknown VM {con.vm_id}")
            if con.effective_vcpus > con.vcpus:
                raise InvariantError(f"container {cid} effective above allocated")
        if not self.conservation_holds():
            raise InvariantError("request conservation violated")
