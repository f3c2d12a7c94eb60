"""Experiment reports: percentile extraction, run records, and file output.

One run produces ``report.json`` (full record), a row appended to
``metrics.csv`` (stable column order across policies), ``actions.csv``
(action-kind breakdown), and ``curve.csv`` for training runs.  Currency is
rounded to 4 decimals and violation percentages to 2 at reporting time only.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .cloud import average_response_time, violation_degree
from .evolution import GenerationStats
from .runner import EpisodeResult, evaluate_episode, make_policy
from .scenario import Scenario

PERCENTILE_LEVELS = (50, 90, 95, 99)

METRICS_COLUMNS = [
    "scenario", "policy", "seed", "steps", "requests", "completed", "rejected",
    "art_ms", "p50_ms", "p90_ms", "p95_ms", "p99_ms", "max_ms",
    "cost_usd", "budget_usd", "violation_pct",
    "actions_vertical", "actions_horizontal", "actions_noop",
]


def percentiles(responses_ms: Sequence[float]) -> dict[str, float] | None:
    """Nearest-rank percentiles at 50/90/95/99 plus the maximum; None when
    there are no responses."""
    if len(responses_ms) == 0:
        return None
    ordered = sorted(responses_ms)
    n = len(ordered)
    out: dict[str, float] = {}
    for level in PERCENTILE_LEVELS:
        rank = max(1, math.ceil(level / 100.0 * n))
        out[f"p{level}"] = ordered[rank - 1]
    out["max"] = ordered[-1]
    return out


@dataclass
class RunReport:
    scenario: str
    policy: str
    seed: int
    steps: int
    requests: int
    completed: int
    rejected: int
    art_ms: float | None
    percentiles_ms: dict[str, float] | None
    cost_usd: float
    budget_usd: float
    violation_pct: float
    action_counts: dict[str, int]
    replica_counts: list[list[int]] = field(default_factory=list)
    curve: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunReport":
        return cls(**doc)


def run_experiment(
    scenario: Scenario,
    policy_name: str,
    seed: int = 0,
    *,
    params=None,
    split: str | None = None,
    validate: bool = False,
) -> RunReport:
    """Replay the configured split under one policy and summarise it."""
    policy = make_policy(policy_name, params=params, seed=seed)
    result = evaluate_episode(scenario, policy, split=split, validate=validate)
    return build_report(scenario, policy_name, seed, result, split=split)


def build_report(
    scenario: Scenario,
    policy_name: str,
    seed: int,
    result: EpisodeResult,
    *,
    split: str | None = None,
    curve: list[GenerationStats] | None = None,
) -> RunReport:
    art = average_response_time(result.responses_ms)
    total = sum(m.arrivals for m in result.metrics)
    rejected = sum(m.rejected for m in result.metrics)
    return RunReport(
        scenario=scenario.name,
        policy=policy_name,
        seed=seed,
        steps=len(result.metrics),
        requests=total,
        completed=len(result.responses_ms),
        rejected=rejected,
        art_ms=art,
        percentiles_ms=percentiles(result.responses_ms),
        cost_usd=result.cost_usd,
        budget_usd=scenario.budget.budget_usd,
        violation_pct=violation_degree(result.cost_usd, scenario.budget.budget_usd),
        action_counts=result.action_counts,
        replica_counts=result.replica_counts,
        curve=[asdict(g) for g in curve] if curve else [],
    )


def _fmt_money(x: float) -> str:
    return f"{x:.4f}"


def _fmt_pct(x: float) -> str:
    return f"{x:.2f}"


def _metrics_row(report: RunReport) -> dict[str, str]:
    pct = report.percentiles_ms or {}
    blank = ""
    return {
        "scenario": report.scenario,
        "policy": report.policy,
        "seed": str(report.seed),
        "steps": str(report.steps),
        "requests": str(report.requests),
        "completed": str(report.completed),
        "rejected": str(report.rejected),
        "art_ms": f"{report.art_ms:.4f}" if report.art_ms is not None else "no-requests",
        "p50_ms": f"{pct['p50']:.4f}" if pct else blank,
        "p90_ms": f"{pct['p90']:.4f}" if pct else blank,
        "p95_ms": f"{pct['p95']:.4f}" if pct else blank,
        "p99_ms": f"{pct['p99']:.4f}" if pct else blank,
        "max_ms": f"{pct['max']:.4f}" if pct else blank,
        "cost_usd": _fmt_money(report.cost_usd),
        "budget_usd": _fmt_money(report.budget_usd),
        "violation_pct": _fmt_pct(report.violation_pct),
        "actions_vertical": str(report.action_counts.get("vertical", 0)),
        "actions_horizontal": str(report.action_counts.get("horizontal", 0)),
        "actions_noop": str(report.action_counts.get("noop", 0)),
    }


def emit_report(report: RunReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json / metrics.csv / actions.csv (+ curve.csv when a
    training curve is present); metrics rows append across runs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    report_path = out / f"report_{report.scenario}_{report.policy}_{report.seed}.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    written["report"] = report_path

    metrics_path = out / "metrics.csv"
    fresh = not metrics_path.exists()
    with open(metrics_path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS)
        if fresh:
            writer.writeheader()
        writer.writerow(_metrics_row(report))
    written["metrics"] = metrics_path

    actions_path = out / f"actions_{report.scenario}_{report.policy}_{report.seed}.csv"
    with open(actions_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "count"])
        for kind in ("vertical", "horizontal", "noop"):
            writer.writerow([kind, report.action_counts.get(kind, 0)])
    written["actions"] = actions_path

    if report.curve:
        curve_path = out / f"curve_{report.scenario}_{report.policy}_{report.seed}.csv"
        with open(curve_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gen", "best_fitness", "mean_fitness", "best_art_ms", "best_cost_usd"])
            for row in report.curve:
                info = row.get("best_info", {})
                writer.writerow([
                    row["gen"], row["best_fitness"], row["mean_fitness"],
                    info.get("art_ms", ""), info.get("cost_usd", ""),
                ])
        written["curve"] = curve_path
    return written


def load_report(path: str | Path) -> RunReport:
    return RunReport.from_dict(json.loads(Path(path).read_text()))
