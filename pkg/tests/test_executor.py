"""Scaling-action executor: branch structure, placement, VM lifecycle."""

import numpy as np
import pytest

from elasticsim.cloud import DEFAULT_VM_CATALOG, VmType
from elasticsim.engine import CloudState, TransientConfig
from elasticsim.executor import ScalingAction, execute_action, place_container, release_idle_vms

from conftest import chain_app, empty_state, make_cluster, make_state, single_ms_app


def _harness(con_vcpu: int, max_vcpu: int, *, replicas: int = 2):
    """Target container with ``con_vcpu`` on a VM with exactly ``max_vcpu``
    headroom, plus an optional sibling replica so deletion is allowed."""
    host_type = VmType("host", con_vcpu + max_vcpu, 64, 0.9)
    catalog = list(DEFAULT_VM_CATALOG) + [host_type]
    cluster = make_cluster(pm_count=2, pm_cpu=64, catalog=catalog)
    app = single_ms_app()
    state = empty_state(app, cluster)
    host = state.rent_vm(host_type)
    target = state.create_container(0, con_vcpu, host, delay=False)
    if replicas > 1:
        sibling_vm = state.rent_vm(DEFAULT_VM_CATALOG[0])
        state.create_container(0, 1, sibling_vm, delay=False)
    return state, target


def _oracle(scale: int, max_vcpu: int, con_vcpu: int):
    """Straight-line transcription of the executor branch table.

    Returns (kind, vcpu_delta, created_vcpus, deleted).
    """
    if scale > 0:
        if max_vcpu > scale:
            return ("vertical", scale, None, False)
        grown = max_vcpu
        remainder = scale - grown
        if remainder == 0:
            return ("vertical", grown, None, False)
        kind = "mixed" if grown > 0 else "horizontal"
        return (kind, grown, remainder, False)
    if scale < 0:
        if con_vcpu > -scale:
            return ("vertical", scale, None, False)
        return ("delete", 0, None, True)
    return ("noop", 0, None, False)


class TestBranchTable:
    def test_vertical_when_headroom_suffices(self):
        state, con = _harness(con_vcpu=1, max_vcpu=3)
        ops = execute_action(state, ScalingAction(0, 2))
        assert ops.kind == "vertical" and ops.vcpu_delta == 2
        assert con.vcpus == 3

    def test_overflow_spawns_replica(self):
        state, con = _harness(con_vcpu=1, max_vcpu=2)
        ops = execute_action(state, ScalingAction(0, 5))
        assert ops.kind == "mixed"
        assert ops.vcpu_delta == 2 and ops.created_vcpus == 3
        assert con.vcpus == 3
        created = state.containers[ops.created_container]
        assert created.ms_id == con.ms_id and created.vcpus == 3

    def test_shrink_in_place(self):
        state, con = _harness(con_vcpu=4, max_vcpu=0)
        ops = execute_action(state, ScalingAction(0, -2))
        assert ops.kind == "vertical" and ops.vcpu_delta == -2
        assert con.vcpus == 2

    def test_delete_when_shrink_exhausts(self):
        state, con = _harness(con_vcpu=3, max_vcpu=0)
        ops = execute_action(state, ScalingAction(0, -4))
        assert ops.kind == "delete" and ops.deleted_container == con.id
        assert con.id not in state.container_order

    def test_last_replica_guard_shrinks_instead(self):
        state, con = _harness(con_vcpu=3, max_vcpu=0, replicas=1)
        ops = execute_action(state, ScalingAction(0, -4))
        assert ops.kind == "vertical" and ops.vcpu_delta == -2
        assert con.vcpus == 1 and con.id in state.container_order
        assert ops.note == "last-replica-guard"

    def test_last_replica_guard_noop_at_one_vcpu(self):
        state, con = _harness(con_vcpu=1, max_vcpu=0, replicas=1)
        ops = execute_action(state, ScalingAction(0, -3))
        assert ops.kind == "noop" and con.vcpus == 1

    def test_exhaustive_enumeration_matches_oracle(self):
        for scale in range(-4, 5):
            for max_vcpu in range(0, 9):
                for con_vcpu in range(1, 9):
                    state, con = _harness(con_vcpu=con_vcpu, max_vcpu=max_vcpu)
                    ops = execute_action(state, ScalingAction(0, scale))
                    kind, delta, created, deleted = _oracle(scale, max_vcpu, con_vcpu)
                    label = f"scale={scale} max={max_vcpu} con={con_vcpu}"
                    assert ops.kind == kind, label
                    assert ops.vcpu_delta == delta, label
                    assert (ops.created_container is not None) == (created is not None), label
                    if created is not None:
                        assert ops.created_vcpus == created, label
                    assert (ops.deleted_container is not None) == deleted, label
                    state.validate()

    def test_noop_changes_nothing(self):
        state, con = _harness(con_vcpu=2, max_vcpu=2)
        vms = {k: v.used_vcpu for k, v in state.vms.items()}
        ops = execute_action(state, ScalingAction(0, 0))
        assert ops.kind == "noop"
        assert {k: v.used_vcpu for k, v in state.vms.items()} == vms


class TestPlacement:
    def _state_with_remaining(self, remaining: list[int]):
        catalog = [VmType(f"t{i}", 16, 64, 0.5 + i) for i in range(len(remaining))]
        cluster = make_cluster(pm_count=4, catalog=list(DEFAULT_VM_CATALOG) + catalog)
        state = empty_state(single_ms_app(), cluster)
        for i, rem in enumerate(remaining):
            vm = state.rent_vm(catalog[i])
            if 16 - rem:
                state.create_container(0, 16 - rem, vm, delay=False)
        return state

    def test_best_fit_minimal_remaining(self):
        state = self._state_with_remaining([3, 2, 8])
        vm_ids = sorted(state.vms)
        assert place_container(state, 2) == vm_ids[1]

    def test_tie_breaks_to_lowest_id(self):
        state = self._state_with_remaining([2, 2])
        vm_ids = sorted(state.vms)
        assert place_container(state, 2) == vm_ids[0]

    def test_rents_cheapest_sufficient_type(self):
        cluster = make_cluster(pm_count=1, pm_cpu=64)
        state = empty_state(single_ms_app(), cluster)
        before = set(state.vms)
        vm_id = place_container(state, 6)
        assert vm_id not in before
        assert state.vms[vm_id].vm_type.name == "m5.2xlarge"

    def test_placement_failure_when_pms_full(self):
        cluster = make_cluster(pm_count=1, pm_cpu=16)
        state = empty_state(single_ms_app(), cluster)
        vm = state.rent_vm(DEFAULT_VM_CATALOG[2])  # 16 vCPU, fills the PM
        state.create_container(0, 16, vm, delay=False)
        assert place_container(state, 2) is None

    def test_full_action_degrades_on_placement_failure(self):
        cluster = make_cluster(pm_count=1, pm_cpu=16)
        state = empty_state(single_ms_app(), cluster)
        vm = state.rent_vm(DEFAULT_VM_CATALOG[2])
        con = state.create_container(0, 14, vm, delay=False)
        state.create_container(0, 1, vm, delay=False)
        ops = execute_action(state, ScalingAction(0, 4))
        assert ops.kind == "vertical" and ops.vcpu_delta == 1
        assert ops.note == "placement-failed"
        assert con.vcpus == 15


class TestVmRelease:
    def test_emptied_vm_released_after_one_interval(self):
        state = make_state(chain_app(2), vm_count=2)
        state.bind_trace(np.zeros(3, dtype=np.int64))
        doomed = state.containers[state.container_order[1]]
        vm_id = doomed.vm_id
        state.delete_container(doomed)  # idle -> freed immediately
        state.env_step(ScalingAction(0, 0))
        assert vm_id in state.vms  # emptied during step 0, still rented
        state.env_step(ScalingAction(0, 0))
        assert vm_id not in state.vms
        released = [vm for vm in state.released_vms if vm.id == vm_id]
        assert released and released[0].end_s == pytest.approx(360.0)

    def test_occupied_vm_never_released(self):
        state = make_state(single_ms_app(), vm_count=1)
        state.bind_trace(np.zeros(5, dtype=np.int64))
        for _ in range(5):
            state.env_step(ScalingAction(0, 0))
        assert len(state.vms) == 1

    def test_release_freezes_cost(self):
        state = make_state(chain_app(2), vm_count=2)
        state.bind_trace(np.zeros(4, dtype=np.int64))
        doomed = state.containers[state.container_order[1]]
        vm_id = doomed.vm_id
        state.delete_container(doomed)
        for _ in range(4):
            state.env_step(ScalingAction(0, 0))
        released = [vm for vm in state.released_vms if vm.id == vm_id][0]
        assert released.rental(state.clock) == pytest.approx(0.768 * 360 / 3600)


class TestDeletionSemantics:
    def test_queued_tasks_move_to_surviving_replica(self):
        state = make_state(single_ms_app(100_000.0))
        con0 = state.containers[state.container_order[0]]
        vm = state.vms[con0.vm_id]
        con1 = state.create_container(0, 1, vm, delay=False)
        for _ in range(4):
            state._push(0.0, 0, None)
        state.advance(0.0)
        queued_before = state.queued_tasks()
        state.delete_container(con1)
        assert state.queued_tasks() == queued_before
        assert all((rid, 0) not in con1.queue for rid in range(4))
        state.advance(600.0)
        assert state.conservation_holds()

    def test_running_task_drains_before_dealloc(self):
        state = make_state(single_ms_app(100_000.0))
        con = state.containers[state.container_order[0]]
        vm = state.vms[con.vm_id]
        sibling = state.create_container(0, 1, vm, delay=False)
        state._push(0.0, 0, None)
        state.advance(1.0)
        busy = con if con.running else sibling
        state.delete_container(busy)
        assert busy.draining and busy.id in state.containers
        state.advance(200.0)
        assert busy.id not in state.containers
        assert state.completed == 1
