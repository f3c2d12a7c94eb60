"""Policies and episode rollouts.

Two policy flavours share the step loop: *action* policies emit one
``<index, scale>`` decision per step for the action executor, while
*direct* policies (threshold / predictive heuristics) edit the deployment
themselves.  ``rollout`` drives either kind for a fixed number of steps;
``evaluate_episode`` wraps a full episode and extracts the objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    ThresholdConfig,
    aws_scale_step,
    fold_ops_kind,
    proscale_step,
    random_action,
)
from .cloud import average_response_time, objective
from .engine import CloudState, StepMetrics
from .executor import ScalingAction
from .gnn import encode_containers
from .hgraph import Normalizer, build_graph
from .params import ModelConfig, ParamSet
from .policy import act
from .scenario import Scenario

POLICY_NAMES = ("hgraphscale", "aws", "proscale", "random", "noop")


class NoopPolicy:
    name = "noop"

    def begin_episode(self, state: CloudState) -> None:
        pass

    def select_action(self, state: CloudState) -> ScalingAction:
        return ScalingAction(ind=0, scale=0)


class RandomPolicy:
    """Uniformly random valid actions from a per-episode seeded stream."""

    name = "random"

    def __init__(self, seed: int, scale_bound: int = 4):
        self.seed = seed
        self.scale_bound = scale_bound
        self._rng = np.random.default_rng(seed)

    def begin_episode(self, state: CloudState) -> None:
        self._rng = np.random.default_rng(self.seed)

    def select_action(self, state: CloudState) -> ScalingAction:
        return random_action(len(state.container_order), self.scale_bound, self._rng)


class GraphPolicy:
    """The learned autoscaler: state graph -> embeddings -> action."""

    name = "hgraphscale"

    def __init__(self, params: ParamSet):
        self.params = params
        self._norm = Normalizer()

    def begin_episode(self, state: CloudState) -> None:
        self._norm = Normalizer()

    def select_action(self, state: CloudState) -> ScalingAction:
        graph = build_graph(state, self._norm, ablate_zeta=self.params.config.ablate_zeta)
        embeddings = encode_containers(graph, self.params.encoder_params())
        return act(embeddings, self.params.policy_params())


class AwsScalePolicy:
    name = "aws"

    def __init__(self, cfg: ThresholdConfig | None = None):
        self.cfg = cfg or ThresholdConfig()

    def begin_episode(self, state: CloudState) -> None:
        pass

    def apply(self, state: CloudState) -> str:
        return fold_ops_kind(aws_scale_step(state, self.cfg))


class ProScalePolicy:
    name = "proscale"

    def begin_episode(self, state: CloudState) -> None:
        pass

    def apply(self, state: CloudState) -> str:
        predictions = {ms: state.predict_ms_workload(ms) for ms in state.app.ms_ids}
        return fold_ops_kind(proscale_step(state, predictions))


def rollout(state: CloudState, policy, steps: int, *, validate: bool = False) -> list[StepMetrics]:
    """Drive one policy for ``steps`` decision intervals."""
    policy.begin_episode(state)
    metrics: list[StepMetrics] = []
    for _ in range(steps):
        if hasattr(policy, "select_action"):
            m = state.env_step(policy.select_action(state))
        else:
            m = state.direct_step(policy.apply)
        if validate:
            state.validate()
        metrics.append(m)
    return metrics


@dataclass
class EpisodeResult:
    objective: float
    art_ms: float | None
    cost_usd: float
    responses_ms: list[float] = field(repr=False)
    metrics: list[StepMetrics] = field(repr=False)
    replica_counts: list[list[int]] = field(repr=False)

    @property
    def action_counts(self) -> dict[str, int]:
        counts = {"vertical": 0, "horizontal": 0, "noop": 0}
        for m in self.metrics:
            counts[m.action_kind] += 1
        return counts


def evaluate_episode(
    scenario: Scenario, policy, *, split: str | None = None, validate: bool = False
) -> EpisodeResult:
    """One full episode of ``policy`` on a fresh state; objective combines
    average latency with the budget-overrun penalty (no requests -> latency
    term 0)."""
    state = scenario.make_state(split)
    steps = scenario.horizon(split)
    policy.begin_episode(state)
    metrics: list[StepMetrics] = []
    replicas: list[list[int]] = []
    for _ in range(steps):
        if hasattr(policy, "select_action"):
            m = state.env_step(policy.select_action(state))
        else:
            m = state.direct_step(policy.apply)
        if validate:
            state.validate()
        metrics.append(m)
        replicas.append([len(state.live_containers(ms)) for ms in state.app.ms_ids])
    art = average_response_time(state.responses_ms)
    cost = state.current_cost()
    score = objective(art if art is not None else 0.0, cost, scenario.budget)
    return EpisodeResult(
        objective=score,
        art_ms=art,
        cost_usd=cost,
        responses_ms=list(state.responses_ms),
        metrics=metrics,
        replica_counts=replicas,
    )


class EpisodeFitness:
    """Picklable fitness for the trainer: flat vector -> (objective, info)."""

    def __init__(self, scenario: Scenario, model_config: ModelConfig, split: str = "train"):
        self.scenario = scenario
        self.template = ParamSet.initialize(model_config, seed=0)
        self.split = split

    def __call__(self, theta: np.ndarray) -> tuple[float, dict]:
        pset = self.template.with_vector(np.asarray(theta))
        try:
            result = evaluate_episode(self.scenario, GraphPolicy(pset), split=self.split)
        except Exception:  # noqa: BLE001 - failed candidates are discarded
            return float("-inf"), {}
        info = {
            "art_ms": result.art_ms,
            "cost_usd": result.cost_usd,
        }
        return result.objective, info


def make_policy(
    name: str,
    *,
    params: ParamSet | None = None,
    seed: int = 0,
    scale_bound: int = 4,
):
    if name == "noop":
        return NoopPolicy()
    if name == "random":
        return RandomPolicy(seed=seed, scale_bound=scale_bound)
    if name == "aws":
        return AwsScalePolicy()
    if name == "proscale":
        return ProScalePolicy()
    if name == "hgraphscale":
        if params is None:
            raise ValueError("the learned policy needs a parameter set")
        return GraphPolicy(params)
    raise ValueError(f"unknown policy {name!r} (choose from {POLICY_NAMES})")
