"""Heuristic autoscalers used as head-to-head competitors and controls.

* Threshold scaler: replica added above the upper utilisation bound,
  removed below the lower bound (never the last replica).
* Predictive scaler: sizes each replica fleet so its per-step service rate
  covers the moving-average workload prediction, via ceiling division.
* Random/no-op action policies for control arms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .engine import CloudState
from .executor import ExecutedOps, ScalingAction, place_container

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdConfig:
    upper: float = 0.8
    lower: float = 0.6

    def __post_init__(self) -> None:
        if not (0.0 < self.lower < self.upper <= 1.0):
            raise ValueError(f"need 0 < lower < upper <= 1, got ({self.lower}, {self.upper})")


def aws_scale_step(state: CloudState, cfg: ThresholdConfig) -> list[ExecutedOps]:
    """Per-container threshold pass over last-window CPU utilisation.

    Replicas inherit the source container's vCPU count.  Skips everything
    on the first step, before any utilisation window exists.
    """
    ops: list[ExecutedOps] = []
    if state.steps_completed == 0:
        return ops
    for cid in list(state.container_order):
        con = state.containers.get(cid)
        if con is None or con.draining:
            continue
        util = con.last_util
        if util > cfg.upper:
            vm_id = place_container(state, con.vcpus)
            if vm_id is None:
                log.warning("threshold scale-up of container %d skipped: no placement", cid)
                continue
            new = state.create_container(con.ms_id, con.vcpus, state.vms[vm_id])
            ops.append(ExecutedOps(kind="horizontal", target_container=cid,
                                   created_container=new.id, created_vcpus=con.vcpus))
        elif util < cfg.lower:
            if len(state.live_containers(con.ms_id)) <= 1:
                continue  # keep the last replica
            state.delete_container(con)
            ops.append(ExecutedOps(kind="delete", target_container=cid, deleted_container=cid))
    return ops


def proscale_step(state: CloudState, predictions: Mapping[int, float]) -> list[ExecutedOps]:
    """Size each microservice's fleet to cover its predicted request rate.

    A replica processing tasks of base time ``et`` on ``v`` vCPUs serves
    ``interval * 1000 * v / et`` tasks per step; the fleet target is the
    ceiling of prediction over one replica's rate (at least one replica).
    New replicas clone the fleet's first container.
    """
    ops: list[ExecutedOps] = []
    interval = state.cluster.decision_interval_s
    for ms in state.app.ms_ids:
        fleet = state.live_containers(ms)
        if not fleet:
            continue
        clone_vcpus = fleet[0].vcpus
        et_ms = state.app.et_of(ms)
        per_replica = interval * 1000.0 * clone_vcpus / et_ms
        predicted = float(predictions.get(ms, 0.0))
        target = max(1, math.ceil(predicted / per_replica))
        while len(fleet) < target:
            vm_id = place_container(state, clone_vcpus)
            if vm_id is None:
                log.warning("predictive scale-up of microservice %d stopped: no placement", ms)
                break
            new = state.create_container(ms, clone_vcpus, state.vms[vm_id])
            ops.append(ExecutedOps(kind="horizontal", target_container=new.id,
                                   created_container=new.id, created_vcpus=clone_vcpus))
            fleet = state.live_containers(ms)
        while len(fleet) > target:
            victim = fleet[-1]
            state.delete_container(victim)
            ops.append(ExecutedOps(kind="delete", target_container=victim.id,
                                   deleted_container=victim.id))
            fleet = state.live_containers(ms)
    return ops


def fold_ops_kind(ops: list[ExecutedOps]) -> str:
    """Step-level action kind for a batch of direct operations."""
    if not ops:
        return "noop"
    kinds = {op.kind for op in ops}
    if kinds <= {"vertical"}:
        return "vertical"
    return "horizontal"


def random_action(num_containers: int, scale_bound: int, rng: np.random.Generator) -> ScalingAction:
    """Uniformly random valid action from a caller-owned generator."""
    if num_containers < 1:
        raise ValueError("need at least one container")
    ind = int(rng.integers(0, num_containers))
    scale = int(rng.integers(-scale_bound, scale_bound + 1))
    return ScalingAction(ind=ind, scale=scale)
