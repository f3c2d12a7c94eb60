"""Shared builders for small deterministic test states."""

from __future__ import annotations

from pathlib import Path

import pytest

from elasticsim.cloud import AppSpec, DEFAULT_VM_CATALOG, Microservice, VmType
from elasticsim.engine import CloudState, ClusterConfig, Pm, TransientConfig

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


def single_ms_app(et_ms: float = 100.0) -> AppSpec:
    return AppSpec("one", [Microservice(0, et_ms)], [])


def chain_app(n: int, et_ms: float | list[float] = 100.0, name: str = "chain") -> AppSpec:
    ets = [et_ms] * n if isinstance(et_ms, (int, float)) else list(et_ms)
    services = [Microservice(i, ets[i]) for i in range(n)]
    return AppSpec(name, services, [(i, i + 1) for i in range(n - 1)])


def make_cluster(
    *,
    vm_count: int = 1,
    vm_type: str = "m5.4xlarge",
    pm_count: int = 4,
    pm_cpu: int = 64,
    h_delay: float = 0.0,
    v_delay: float = 0.0,
    interval: float = 180.0,
    catalog: list[VmType] | None = None,
    sma_window: int = 5,
) -> ClusterConfig:
    return ClusterConfig(
        vm_catalog=catalog or list(DEFAULT_VM_CATALOG),
        pm_cpu=pm_cpu,
        pm_count=pm_count,
        initial_vm_type=vm_type,
        initial_vm_count=vm_count,
        decision_interval_s=interval,
        transient=TransientConfig(horizontal_delay_s=h_delay, vertical_delay_s=v_delay),
        sma_window=sma_window,
    )


def make_state(app: AppSpec, **cluster_kwargs) -> CloudState:
    return CloudState.init_scenario(app, make_cluster(**cluster_kwargs))


def empty_state(app: AppSpec, cluster: ClusterConfig) -> CloudState:
    """State with PMs only; tests place VMs and containers by hand."""
    state = CloudState(app, cluster)
    for i in range(cluster.pm_count):
        state.pms.append(Pm(i, cluster.pm_cpu, cluster.pm_mem_gib))
    return state
