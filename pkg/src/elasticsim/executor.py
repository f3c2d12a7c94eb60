"""Turn a ``<index, scale>`` decision into concrete vertical/horizontal
operations on the deployment, plus Best-Fit placement and VM lifecycle.

Branch structure for a target container with host-VM headroom ``max_vcpu``:

* ``scale > 0``: grow in place when ``max_vcpu > scale``; otherwise absorb
  the headroom in place and create a sibling replica holding the remainder
  (placed Best-Fit, renting the cheapest fitting VM type when needed).
* ``scale < 0``: shrink in place when the container keeps at least 1 vCPU;
  otherwise delete it.  Deleting the last replica of a microservice would
  deadlock the workflow DAG, so that case degrades to "shrink to 1 vCPU".
* ``scale = 0``: no-op.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .cloud import VmType

if TYPE_CHECKING:
    from .engine import CloudState, Container

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalingAction:
    """Container index in the current live list plus a signed vCPU amount."""

    ind: int
    scale: int


@dataclass
class ExecutedOps:
    """What an action actually did once capacity limits were applied."""

    kind: str                      # vertical | horizontal | mixed | delete | noop
    target_container: int | None = None
    vcpu_delta: int = 0
    created_container: int | None = None
    created_vcpus: int = 0
    deleted_container: int | None = None
    rented_vm: int | None = None
    note: str = ""


def fold_kind(kind: str) -> str:
    """Collapse executor kinds into the three reported action categories."""
    if kind in ("horizontal", "mixed", "delete"):
        return "horizontal"
    if kind == "vertical":
        return "vertical"
    return "noop"


def place_container(state: "CloudState", demand_vcpus: int) -> int | None:
    """Best-Fit: the feasible VM with least remaining capacity (ties to the
    lowest id); rents the cheapest sufficient VM type when none fits.
    Returns the VM id, or None when no PM can host a new VM either."""
    if demand_vcpus < 1:
        raise ValueError("placement demand must be at least 1 vCPU")
    best_id = None
    best_remaining = None
    for vm_id in sorted(state.vms):
        remaining = state.vms[vm_id].remaining_vcpu
        if remaining >= demand_vcpus and (best_remaining is None or remaining < best_remaining):
            best_remaining = remaining
            best_id = vm_id
    if best_id is not None:
        return best_id
    for vm_type in sorted(state.cluster.vm_catalog, key=lambda t: (t.usd_per_hour, t.vcpu)):
        if vm_type.vcpu >= demand_vcpus and state.find_pm_for(vm_type) is not None:
            vm = state.rent_vm(vm_type)
            assert vm is not None
            return vm.id
    return None


def execute_action(state: "CloudState", action: ScalingAction) -> ExecutedOps:
    if action.ind < 0 or action.ind >= len(state.container_order):
        log.warning("stale container index %d (live: %d); action degraded to no-op",
                    action.ind, len(state.container_order))
        return ExecutedOps(kind="noop", note="stale-index")
    con = state.containers[state.container_order[action.ind]]
    if action.scale > 0:
        return _scale_up(state, con, action.scale)
    if action.scale < 0:
        return _scale_down(state, con, -action.scale)
    return ExecutedOps(kind="noop", target_container=con.id)


def _scale_up(state: "CloudState", con: "Container", scale: int) -> ExecutedOps:
    vm = state.vms[con.vm_id]
    max_vcpu = vm.remaining_vcpu
    if max_vcpu > scale:
        state.resize_container(con, scale)
        return ExecutedOps(kind="vertical", target_container=con.id, vcpu_delta=scale)
    grown = max_vcpu
    if grown > 0:
        state.resize_container(con, grown)
    remainder = scale - grown
    if remainder == 0:
        # headroom matched the request exactly; nothing left for a replica
        return ExecutedOps(kind="vertical", target_container=con.id, vcpu_delta=grown)
    vms_before = set(state.vms)
    target_vm = place_container(state, remainder)
    if target_vm is None:
        log.warning("no placement for %d vCPUs; action degraded to its vertical part", remainder)
        kind = "vertical" if grown > 0 else "noop"
        return ExecutedOps(kind=kind, target_container=con.id, vcpu_delta=grown,
                           note="placement-failed")
    rented = target_vm if target_vm not in vms_before else None
    new_con = state.create_container(con.ms_id, remainder, state.vms[target_vm])
    kind = "mixed" if grown > 0 else "horizontal"
    return ExecutedOps(kind=kind, target_container=con.id, vcpu_delta=grown,
                       created_container=new_con.id, created_vcpus=remainder,
                       rented_vm=rented)


def _scale_down(state: "CloudState", con: "Container", amount: int) -> ExecutedOps:
    if con.vcpus > amount:
        state.resize_container(con, -amount)
        return ExecutedOps(kind="vertical", target_container=con.id, vcpu_delta=-amount)
    siblings = [c for c in state.live_containers(con.ms_id) if c.id != con.id]
    if not siblings:
        # availability guard: keep the last replica, shrink it instead
        delta = -(con.vcpus - 1)
        if delta < 0:
            state.resize_container(con, delta)
            return ExecutedOps(kind="vertical", target_container=con.id, vcpu_delta=delta,
                               note="last-replica-guard")
        return ExecutedOps(kind="noop", target_container=con.id, note="last-replica-guard")
    state.delete_container(con)
    return ExecutedOps(kind="delete", target_container=con.id, deleted_container=con.id)


def release_idle_vms(state: "CloudState") -> list[int]:
    """Release VMs that have hosted nothing for more than one full decision
    interval (a machine emptied during step k survives the step-k check and
    goes at the end of step k+1); the rental clock freezes at release."""
    released = []
    for vm_id in sorted(state.vms):
        vm = state.vms[vm_id]
        if vm.container_ids or vm.empty_since is None:
            continue
        if state.clock - vm.empty_since > state.cluster.decision_interval_s:
            state._release_vm(vm)
            released.append(vm_id)
    return released
