"""Event-loop semantics: deployment, dispatch, timing, transients, accounting."""

import numpy as np
import pytest

from elasticsim.cloud import Microservice, ScenarioError
from elasticsim.engine import SmoothWrr, cwrr_weights
from elasticsim.executor import ScalingAction, execute_action

from conftest import chain_app, make_state, single_ms_app


def _push_arrival(state, t):
    state._push(t, 0, None)  # kind 0 = arrival


class TestInitScenario:
    def test_eleven_services_over_three_vms(self):
        state = make_state(chain_app(11), vm_count=3)
        assert len(state.container_order) == 11
        loads = sorted(vm.used_vcpu for vm in state.vms.values())
        assert loads == [3, 4, 4]

    def test_three_services_one_vm(self):
        state = make_state(chain_app(3), vm_count=1)
        assert len(state.vms) == 1
        assert next(iter(state.vms.values())).used_vcpu == 3

    def test_capacity_check(self):
        state = make_state(chain_app(40), vm_count=3)  # 40 <= 3 * 16
        assert len(state.container_order) == 40
        with pytest.raises(ScenarioError):
            make_state(chain_app(50), vm_count=3)

    def test_initial_containers_active_immediately(self):
        state = make_state(chain_app(3), vm_count=1, h_delay=30.0)
        assert all(c.active_at == 0.0 for c in state.containers.values())


class TestCwrrWeights:
    def test_symmetric(self):
        assert cwrr_weights([2, 2]).tolist() == [0.5, 0.5]

    def test_single(self):
        assert cwrr_weights([4]).tolist() == [1.0]

    def test_normalisation(self):
        got = cwrr_weights([1, 2, 5])
        oracle = np.array([1, 2, 5]) / 8.0
        assert np.allclose(got, oracle, rtol=1e-12)
        assert got.sum() == pytest.approx(1.0)

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            cwrr_weights([])


class TestDispatchFairness:
    def _counts(self, weights, n):
        wrr = SmoothWrr()
        ids = list(range(len(weights)))
        counts = np.zeros(len(weights))
        for _ in range(n):
            counts[wrr.pick(ids, np.asarray(weights))] += 1
        return counts

    def test_even_pair(self):
        assert self._counts([0.5, 0.5], 4).tolist() == [2.0, 2.0]

    def test_single_target(self):
        assert self._counts([1.0], 9).tolist() == [9.0]

    def test_quarter_three_quarter(self):
        assert self._counts([0.25, 0.75], 8).tolist() == [2.0, 6.0]

    def test_bounded_drift_on_random_weights(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            k = int(rng.integers(1, 9))
            weights = cwrr_weights(rng.integers(1, 9, size=k).astype(float))
            n = 500
            counts = self._counts(weights, n)
            assert np.abs(counts - n * weights).max() < 1.0


class TestAdvance:
    def test_single_task_response(self):
        state = make_state(single_ms_app(100.0))
        _push_arrival(state, 0.0)
        done = state.advance(180.0)
        assert done == [pytest.approx(100.0)]

    def test_chain_sums_execution_times(self):
        state = make_state(chain_app(2, 100.0))
        _push_arrival(state, 0.0)
        done = state.advance(180.0)
        assert done == [pytest.approx(200.0)]

    def test_fifo_wait(self):
        state = make_state(single_ms_app(100.0))
        _push_arrival(state, 0.0)
        _push_arrival(state, 0.0)
        done = state.advance(180.0)
        assert done == [pytest.approx(100.0), pytest.approx(200.0)]

    def test_join_waits_for_slowest_predecessor(self):
        from elasticsim.cloud import AppSpec

        app = AppSpec(
            "diamond",
            [Microservice(0, 10.0), Microservice(1, 100.0), Microservice(2, 30.0), Microservice(3, 10.0)],
            [(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        state = make_state(app)
        _push_arrival(state, 0.0)
        done = state.advance(400.0)
        # critical path 10 + 100 + 10
        assert done == [pytest.approx(120.0)]

    def test_cannot_rewind(self):
        state = make_state(single_ms_app())
        state.advance(10.0)
        with pytest.raises(ValueError):
            state.advance(5.0)


class TestEnvStep:
    def test_noop_zero_arrivals(self):
        state = make_state(single_ms_app())
        state.bind_trace(np.array([0, 0]))
        before_cons = list(state.container_order)
        m = state.env_step(ScalingAction(0, 0))
        assert state.clock == 180.0
        assert m.action_kind == "noop"
        assert m.arrivals == 0 and m.completed == 0
        assert state.container_order == before_cons

    def test_vertical_delay_gates_new_capacity(self):
        state = make_state(single_ms_app(100.0), v_delay=10.0)
        execute_action(state, ScalingAction(0, 1))  # +1 vCPU effective at t=10
        _push_arrival(state, 5.0)
        _push_arrival(state, 50.0)
        done = state.advance(180.0)
        # first task starts before the resize lands (100 ms), second after (50 ms)
        assert done == [pytest.approx(100.0), pytest.approx(50.0)]

    def test_horizontal_delay_blocks_dispatch(self):
        state = make_state(single_ms_app(100.0), h_delay=180.0)
        con = state.containers[state.container_order[0]]
        vm = state.vms[con.vm_id]
        new = state.create_container(con.ms_id, 1, vm)
        assert new.active_at == pytest.approx(180.0)
        for t in np.linspace(0.0, 170.0, 10):
            _push_arrival(state, float(t))
        state.advance(179.0)
        assert len(new.queue) == 0 and new.running is None
        assert state.completed + len(state._live_wf) == 10

    def test_stale_index_degrades_to_noop(self):
        state = make_state(single_ms_app())
        state.bind_trace(np.array([0]))
        m = state.env_step(ScalingAction(99, 3))
        assert m.action_kind == "noop"

    def test_art_excludes_rejected(self):
        state = make_state(single_ms_app())
        state.bind_trace(np.array([2]))
        # drop the only replica by hand to force admission-time rejection
        con = state.containers[state.container_order[0]]
        state.delete_container(con)
        m = state.env_step(ScalingAction(0, 0))
        assert m.rejected == 2 and m.completed == 0
        assert m.art_ms is None
        assert state.conservation_holds()


class TestAccounting:
    def test_cost_floor_accrues(self):
        state = make_state(chain_app(3), vm_count=3)
        state.bind_trace(np.zeros(4, dtype=np.int64))
        for _ in range(4):
            m = state.env_step(ScalingAction(0, 0))
        # 3 m5.4xlarge for 720 s
        assert m.cumulative_cost == pytest.approx(3 * 0.768 * 720 / 3600)

    def test_queue_drains_without_arrivals(self):
        state = make_state(single_ms_app(60_000.0))
        for t in range(12):
            _push_arrival(state, 0.0)
        state.advance(0.0)
        sizes = []
        for t in range(1, 14):
            state.advance(t * 60.0)
            sizes.append(state.queued_tasks())
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))
        assert sizes[-1] == 0

    def test_windowed_utilisation(self):
        state = make_state(single_ms_app(90_000.0))  # one 90 s task
        state.bind_trace(np.array([1, 0]))
        state.env_step(ScalingAction(0, 0))
        con = state.containers[state.container_order[0]]
        assert con.last_util == pytest.approx(0.5)
        assert con.last_art_ms == pytest.approx(90_000.0)
        state.env_step(ScalingAction(0, 0))
        assert con.last_util == 0.0

    def test_utilisation_for_task_spanning_windows(self):
        state = make_state(single_ms_app(270_000.0))  # 270 s task spans a boundary
        state.bind_trace(np.array([1, 0, 0]))
        state.env_step(ScalingAction(0, 0))
        con = state.containers[state.container_order[0]]
        assert con.last_util == pytest.approx(1.0)
        state.env_step(ScalingAction(0, 0))
        assert con.last_util == pytest.approx(0.5)

    def test_validate_passes_through_random_run(self):
        state = make_state(chain_app(5), vm_count=3)
        state.bind_trace(np.array([3, 5, 2, 0, 4]))
        rng = np.random.default_rng(1)
        for _ in range(5):
            action = ScalingAction(int(rng.integers(0, len(state.container_order))),
                                   int(rng.integers(-4, 5)))
            state.env_step(action)
            state.validate()
            assert state.conservation_holds()
