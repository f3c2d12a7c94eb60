"""Scenario assembly: application + trace + cluster + budget in one place.

A scenario document is JSON with paths resolved relative to the document::

    {
      "name": "...", "app_file": "...", "trace_file": "...",
      "vm_catalog": "default" | [{"name", "vcpu", "mem_gib", "usd_per_hour"}],
      "pm_cpu": 64, "pm_mem_gib": 3200, "pm_count": 8,
      "initial_vm_type": "m5.4xlarge", "initial_vm_count": 3,
      "decision_interval_s": 180,
      "transient": {"h_delay_s": 30, "v_delay_s": 1},
      "budget_usd": 200, "rho": 100, "horizon_steps": null,
      "sma_window": 5, "split": "test", "jitter_seed": null
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cloud import (
    DEFAULT_VM_CATALOG,
    AppSpec,
    BudgetPolicy,
    ScenarioError,
    VmType,
)
from .engine import CloudState, ClusterConfig, TransientConfig
from .workload import Trace, load_trace, split_train_test

SPLITS = ("train", "test", "all")


@dataclass(frozen=True)
class Scenario:
    name: str
    app: AppSpec
    trace: Trace
    cluster: ClusterConfig
    budget: BudgetPolicy
    split: str = "test"
    horizon_steps: int | None = None
    jitter_seed: int | None = None

    def split_counts(self, split: str | None = None) -> np.ndarray:
        split = split or self.split
        if split not in SPLITS:
            raise ScenarioError(f"unknown split {split!r}")
        if split == "all":
            counts = self.trace.counts
        else:
            train, test = split_train_test(self.trace)
            counts = train.counts if split == "train" else test.counts
        if self.horizon_steps is not None:
            counts = counts[: self.horizon_steps]
        return counts

    def horizon(self, split: str | None = None) -> int:
        return int(self.split_counts(split).size)

    def make_state(self, split: str | None = None) -> CloudState:
        state = CloudState.init_scenario(self.app, self.cluster)
        state.bind_trace(self.split_counts(split), self.jitter_seed)
        return state


def _parse_catalog(raw) -> list[VmType]:
    if raw in (None, "default"):
        return list(DEFAULT_VM_CATALOG)
    return [
        VmType(str(t["name"]), int(t["vcpu"]), int(t["mem_gib"]), float(t["usd_per_hour"]))
        for t in raw
    ]


def load_scenario(
    path: str | Path,
    *,
    worst_case: bool = False,
    budget_usd: float | None = None,
    rho: float | None = None,
    split: str | None = None,
) -> Scenario:
    """Load a scenario document, optionally overriding the transient preset
    (worst case: 180 s horizontal / 10 s vertical), budget, penalty, split."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from exc
    base = path.parent
    try:
        app = AppSpec.load(base / doc["app_file"])
        trace = load_trace(base / doc["trace_file"])
    except KeyError as exc:
        raise ScenarioError(f"{path}: missing required field {exc}") from exc

    transient_doc = doc.get("transient", {})
    transient = TransientConfig(
        horizontal_delay_s=float(transient_doc.get("h_delay_s", 30.0)),
        vertical_delay_s=float(transient_doc.get("v_delay_s", 1.0)),
    )
    if worst_case:
        transient = TransientConfig.worst_case()

    cluster = ClusterConfig(
        vm_catalog=_parse_catalog(doc.get("vm_catalog")),
        pm_cpu=int(doc.get("pm_cpu", 64)),
        pm_mem_gib=int(doc.get("pm_mem_gib", 3200)),
        pm_count=int(doc.get("pm_count", 8)),
        initial_vm_type=str(doc.get("initial_vm_type", "m5.4xlarge")),
        initial_vm_count=int(doc.get("initial_vm_count", 3)),
        decision_interval_s=float(doc.get("decision_interval_s", 180.0)),
        transient=transient,
        sma_window=int(doc.get("sma_window", 5)),
    )
    horizon = doc.get("horizon_steps")
    budget = BudgetPolicy(
        budget_usd=float(budget_usd if budget_usd is not None else doc.get("budget_usd", 200.0)),
        rho=float(rho if rho is not None else doc.get("rho", 100.0)),
        horizon_steps=int(horizon) if horizon is not None else 480,
    )
    scenario = Scenario(
        name=str(doc.get("name", path.stem)),
        app=app,
        trace=trace,
        cluster=cluster,
        budget=budget,
        split=str(doc.get("split", "test")),
        horizon_steps=int(horizon) if horizon is not None else None,
        jitter_seed=doc.get("jitter_seed"),
    )
    if split is not None:
        scenario = replace(scenario, split=split)
    if scenario.split not in SPLITS:
        raise ScenarioError(f"{path}: unknown split {scenario.split!r}")
    return scenario
