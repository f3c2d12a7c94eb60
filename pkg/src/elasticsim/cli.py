"""Command-line entry point: train, evaluate, sweep, report.

Examples::

    elasticsim train --scenario data/scenarios/toy.json --pop 8 --gens 50 \
        --seed 7 --out runs/toy
    elasticsim evaluate --scenario data/scenarios/toy.json --policy proscale \
        --out runs/toy
    elasticsim evaluate --scenario data/scenarios/toy.json --policy hgraphscale \
        --params runs/toy/params.bin --worst-case --out runs/toy-wc
    elasticsim sweep --scenario data/scenarios/toy.json --policy noop \
        --budget 150 200 250 --out runs/sweep
    elasticsim report --out runs/toy
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .evolution import ErlConfig, train
from .params import ModelConfig, ParamSet
from .report import build_report, emit_report, run_experiment
from .runner import POLICY_NAMES, EpisodeFitness, GraphPolicy, evaluate_episode
from .scenario import load_scenario


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", required=True, help="scenario JSON document")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/out", help="output directory")
    parser.add_argument("--worst-case", action="store_true",
                        help="use the worst-case transient preset (180 s / 10 s)")
    parser.add_argument("--split", choices=["train", "test", "all"], default=None,
                        help="trace split to replay (default: scenario setting)")
    parser.add_argument("--ablate-zeta", action="store_true",
                        help="drop the host-VM-headroom container feature")
    parser.add_argument("--ablate-layers", choices=["none", "pm", "pm+vm"], default="none",
                        help="collapse machine layers of the encoder")


def _model_config(args: argparse.Namespace, *, embed_dim: int = 64, hidden_dim: int = 64) -> ModelConfig:
    return ModelConfig(
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        ablate_pm=args.ablate_layers in ("pm", "pm+vm"),
        ablate_vm=args.ablate_layers == "pm+vm",
        ablate_zeta=args.ablate_zeta,
    )


def _load_scenario(args: argparse.Namespace):
    return load_scenario(
        args.scenario,
        worst_case=args.worst_case,
        budget_usd=args.budget,
        rho=args.rho,
        split=args.split,
    )


def _cmd_train(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args)
    model_cfg = _model_config(args, embed_dim=args.embed_dim, hidden_dim=args.embed_dim)
    cfg = ErlConfig(
        population=args.pop,
        generations=args.gens,
        learning_rate=args.lr,
        sigma=args.sigma,
        seed=args.seed,
        rank_shaping=args.shaping,
        workers=args.workers,
    )
    split = args.split or "train"
    fitness = EpisodeFitness(scenario, model_cfg, split=split)
    theta0 = ParamSet.initialize(model_cfg, seed=args.seed).vector()

    def _progress(stats) -> None:
        if stats.gen % args.log_every == 0 or stats.gen == cfg.generations - 1:
            print(f"gen {stats.gen:4d}  best {stats.best_fitness:12.3f}  "
                  f"mean {stats.mean_fitness:12.3f}")

    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        result = train(cfg, fitness, theta0, pool=pool, on_generation=_progress)
    finally:
        if pool is not None:
            pool.shutdown()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trained = fitness.template.with_vector(result.theta)
    params_path = out / "params.bin"
    trained.save(params_path, seed=args.seed)

    episode = evaluate_episode(scenario, GraphPolicy(trained), split=split)
    report = build_report(scenario, "hgraphscale", args.seed, episode,
                          split=split, curve=result.curve)
    written = emit_report(report, out)
    print(f"trained parameters -> {params_path}")
    for kind, path in written.items():
        print(f"{kind} -> {path}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args)
    params = None
    if args.policy == "hgraphscale":
        if not args.params:
            model_cfg = _model_config(args)
            params = ParamSet.initialize(model_cfg, seed=args.seed)
            print("no --params given: evaluating freshly initialised parameters")
        else:
            params, _ = ParamSet.load(args.params)
    report = run_experiment(scenario, args.policy, args.seed, params=params, split=args.split)
    written = emit_report(report, args.out)
    art = f"{report.art_ms:.2f} ms" if report.art_ms is not None else "no requests"
    print(f"{scenario.name} / {args.policy}: ART {art}, cost {report.cost_usd:.4f} USD, "
          f"violation {report.violation_pct:.2f}%")
    for kind, path in written.items():
        print(f"{kind} -> {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    budgets = args.budget_values or [None]
    rhos = args.rho_values or [None]
    params = None
    if args.policy == "hgraphscale" and args.params:
        params, _ = ParamSet.load(args.params)
    for budget in budgets:
        for rho in rhos:
            scenario = load_scenario(
                args.scenario,
                worst_case=args.worst_case,
                budget_usd=budget,
                rho=rho,
                split=args.split,
            )
            report = run_experiment(scenario, args.policy, args.seed,
                                    params=params, split=args.split)
            emit_report(report, args.out)
            label = f"budget={budget or 'cfg'} rho={rho or 'cfg'}"
            art = f"{report.art_ms:.2f}" if report.art_ms is not None else "n/a"
            print(f"{label}: ART {art} ms, cost {report.cost_usd:.4f}, "
                  f"violation {report.violation_pct:.2f}%")
    print(f"metrics -> {Path(args.out) / 'metrics.csv'}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    metrics = Path(args.out) / "metrics.csv"
    if not metrics.exists():
        print(f"no metrics at {metrics}", file=sys.stderr)
        return 1
    with open(metrics, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        print("metrics.csv is empty", file=sys.stderr)
        return 1
    cols = ["scenario", "policy", "seed", "art_ms", "p99_ms", "cost_usd", "violation_pct"]
    widths = {c: max(len(c), max(len(r[c]) for r in rows)) for c in cols}
    print("  ".join(c.ljust(widths[c]) for c in cols))
    for r in rows:
        print("  ".join(r[c].ljust(widths[c]) for c in cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elasticsim",
                                     description="microservice autoscaling simulator and trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the learned autoscaler")
    _add_common(p_train)
    p_train.add_argument("--budget", type=float, default=None, help="override budget (USD)")
    p_train.add_argument("--rho", type=float, default=None, help="override penalty coefficient")
    p_train.add_argument("--pop", type=int, default=40)
    p_train.add_argument("--gens", type=int, default=1000)
    p_train.add_argument("--lr", type=float, default=0.01)
    p_train.add_argument("--sigma", type=float, default=0.05)
    p_train.add_argument("--workers", type=int, default=1)
    p_train.add_argument("--shaping", action="store_true", help="centered-rank fitness shaping")
    p_train.add_argument("--embed-dim", type=int, default=64)
    p_train.add_argument("--log-every", type=int, default=10)
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="replay one policy and report")
    _add_common(p_eval)
    p_eval.add_argument("--budget", type=float, default=None, help="override budget (USD)")
    p_eval.add_argument("--rho", type=float, default=None, help="override penalty coefficient")
    p_eval.add_argument("--policy", choices=list(POLICY_NAMES), required=True)
    p_eval.add_argument("--params", default=None, help="trained parameter file")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="budget / penalty sweeps")
    _add_common(p_sweep)
    p_sweep.add_argument("--policy", choices=list(POLICY_NAMES), required=True)
    p_sweep.add_argument("--params", default=None)
    p_sweep.add_argument("--budget", dest="budget_values", type=float, nargs="+", default=None)
    p_sweep.add_argument("--rho", dest="rho_values", type=float, nargs="+", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_report = sub.add_parser("report", help="print the metrics table of an output directory")
    p_report.add_argument("--out", default="runs/out")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
