"""Discrete-event microservice cloud simulator with a learned autoscaler.

Public surface: the domain formulas (`cloud`), trace tooling (`workload`),
the simulator (`engine`), the scaling executor (`executor`), the state graph
and its attention encoder (`hgraph`, `gnn`), the decision head (`policy`),
flat parameters (`params`), the evolution-strategies trainer (`evolution`),
heuristic baselines (`baselines`), and experiment plumbing (`scenario`,
`runner`, `report`, `cli`).
"""

from .cloud import (
    AppSpec,
    BudgetPolicy,
    DEFAULT_VM_CATALOG,
    Microservice,
    VmType,
    average_response_time,
    execution_time,
    objective,
    total_cost,
    violation_degree,
    vm_cost,
)
from .engine import CloudState, ClusterConfig, StepMetrics, TransientConfig, cwrr_weights
from .executor import ExecutedOps, ScalingAction, execute_action, place_container
from .params import ModelConfig, ParamSet
from .scenario import Scenario, load_scenario
from .workload import Trace, WorkloadHistory, load_trace, sma_predict, split_train_test

__version__ = "0.1.0"

__all__ = [
    "AppSpec", "BudgetPolicy", "DEFAULT_VM_CATALOG", "Microservice", "VmType",
    "average_response_time", "execution_time", "objective", "total_cost",
    "violation_degree", "vm_cost",
    "CloudState", "ClusterConfig", "StepMetrics", "TransientConfig", "cwrr_weights",
    "ExecutedOps", "ScalingAction", "execute_action", "place_container",
    "ModelConfig", "ParamSet",
    "Scenario", "load_scenario",
    "Trace", "WorkloadHistory", "load_trace", "sma_predict", "split_train_test",
    "__version__",
]
