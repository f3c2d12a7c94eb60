"""Formula-level checks for the domain model."""

from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elasticsim.cloud import (
    AppSpec,
    BudgetPolicy,
    Microservice,
    ScenarioError,
    average_response_time,
    execution_time,
    objective,
    total_cost,
    violation_degree,
    vm_cost,
)


class _VmStub:
    def __init__(self, price, start, end=None):
        self.usd_per_hour = price
        self.start_s = start
        self.end_s = end


class TestExecutionTime:
    def test_identity_at_one_vcpu(self):
        assert execution_time(100.0, 1) == 100.0

    def test_four_way_split(self):
        assert execution_time(100.0, 4) == 25.0

    def test_matches_rational_arithmetic(self):
        got = execution_time(37.0, 3)
        assert got == pytest.approx(float(Fraction(37, 3)), rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            execution_time(0.0, 1)
        with pytest.raises(ValueError):
            execution_time(100.0, 0)

    @given(st.floats(0.001, 1e6), st.integers(1, 64), st.floats(0.001, 1e3))
    def test_homogeneous_in_base_time(self, et, cpu, k):
        lhs = execution_time(k * et, cpu)
        rhs = k * execution_time(et, cpu)
        assert lhs == pytest.approx(rhs, rel=1e-9)


class TestVmCost:
    def test_one_hour_at_catalog_price(self):
        assert vm_cost(0.192, 0.0, 3600.0) == pytest.approx(0.192, rel=1e-12)

    def test_zero_span(self):
        assert vm_cost(0.768, 1000.0, 1000.0) == 0.0

    def test_matches_decimal_arithmetic(self):
        oracle = Decimal("2.304") * (Decimal(5400) - Decimal(0)) / Decimal(3600)
        assert vm_cost(2.304, 0.0, 5400.0) == pytest.approx(float(oracle), rel=1e-12)

    def test_negative_span_rejected(self):
        with pytest.raises(ValueError):
            vm_cost(0.192, 10.0, 5.0)


class TestTotalCost:
    def test_empty(self):
        assert total_cost([], 100.0) == 0.0

    def test_additive(self):
        vms = [_VmStub(0.192, 0.0, 3600.0), _VmStub(0.192, 0.0, 3600.0)]
        assert total_cost(vms) == pytest.approx(0.384, rel=1e-12)

    def test_full_day_floor(self):
        day = 24 * 3600.0
        vms = [_VmStub(0.768, 0.0) for _ in range(3)]
        oracle = sum(0.768 * day / 3600.0 for _ in range(3))
        got = total_cost(vms, horizon_end_s=day)
        assert got == pytest.approx(oracle, rel=1e-12)
        assert got == pytest.approx(55.296, rel=1e-9)

    def test_never_activated_contributes_zero(self):
        assert total_cost([_VmStub(0.192, None)], 3600.0) == 0.0

    def test_permutation_invariant(self):
        vms = [_VmStub(0.192, 0.0, 100.0), _VmStub(0.768, 50.0, 200.0), _VmStub(2.304, 0.0, 5400.0)]
        assert total_cost(vms) == pytest.approx(total_cost(list(reversed(vms))), rel=1e-15)


class TestAverageResponseTime:
    def test_single(self):
        assert average_response_time([300.0]) == 300.0

    def test_mean(self):
        assert average_response_time([100.0, 200.0, 300.0]) == 200.0

    def test_empty_is_explicit(self):
        assert average_response_time([]) is None

    def test_matches_streaming_mean(self):
        rng = np.random.default_rng(42)
        samples = rng.uniform(1.0, 5000.0, size=10_000).tolist()
        mean = 0.0
        for i, x in enumerate(samples, start=1):  # Welford-style streaming oracle
            mean += (x - mean) / i
        assert average_response_time(samples) == pytest.approx(mean, rel=1e-9)


class TestObjective:
    POLICY = BudgetPolicy(budget_usd=200.0, rho=100.0)

    def test_no_violation(self):
        assert objective(300.0, 150.0, self.POLICY) == -300.0

    def test_penalised(self):
        assert objective(300.0, 250.0, self.POLICY) == -5300.0

    def test_boundary(self):
        assert objective(300.0, 200.0, self.POLICY) == -300.0

    @given(st.floats(0, 1e5), st.floats(0, 1e5), st.floats(0, 1e4))
    def test_monotone_nonincreasing(self, art, cost, bump):
        base = objective(art, cost, self.POLICY)
        assert objective(art + bump, cost, self.POLICY) <= base
        assert objective(art, cost + bump, self.POLICY) <= base


class TestViolationDegree:
    def test_at_budget(self):
        assert violation_degree(200.0, 200.0) == 0.0

    def test_ten_percent(self):
        assert violation_degree(220.0, 200.0) == pytest.approx(10.0, rel=1e-12)

    def test_regenerates_reported_value(self):
        got = violation_degree(515.16, 200.0)
        assert got == pytest.approx(157.58, abs=1e-9)
        assert f"{got:.2f}" == "157.58"

    @given(st.floats(0, 1e6), st.floats(0.01, 1e6))
    def test_zero_iff_within_budget(self, cost, budget):
        v = violation_degree(cost, budget)
        assert (v == 0.0) == (cost <= budget)


class TestAppSpec:
    def test_rejects_cycle(self):
        with pytest.raises(ScenarioError):
            AppSpec("bad", [Microservice(0, 1.0), Microservice(1, 1.0)], [(0, 1), (1, 0)])

    def test_rejects_nonpositive_et(self):
        with pytest.raises(ScenarioError):
            AppSpec("bad", [Microservice(0, 0.0)], [])

    def test_rejects_unknown_edge(self):
        with pytest.raises(ScenarioError):
            AppSpec("bad", [Microservice(0, 1.0)], [(0, 7)])

    def test_roots_and_leaves(self):
        app = AppSpec(
            "diamond",
            [Microservice(i, 10.0) for i in range(4)],
            [(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        assert app.roots == [0]
        assert app.leaves == [3]
        assert sorted(app.preds[3]) == [1, 2]

    def test_round_trip(self, tmp_path):
        app = AppSpec("rt", [Microservice(0, 5.0), Microservice(1, 7.5)], [(0, 1)])
        path = tmp_path / "app.json"
        import json

        path.write_text(json.dumps(app.to_dict()))
        loaded = AppSpec.load(path)
        assert loaded.to_dict() == app.to_dict()
