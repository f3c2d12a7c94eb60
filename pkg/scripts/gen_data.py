#!/usr/bin/env python3
"""Regenerate the seeded example data under data/.

Applications are layered DAGs with per-task base execution times drawn from
a fixed-seed generator; traces are synthetic per-step request counts (one
bursty desk-scale trace plus two-day diurnal/bursty traces).  Output is
deterministic, so re-running this script must not change committed files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


def write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {path.relative_to(ROOT)}")


def write_trace(path: Path, counts: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["count"] + [str(int(c)) for c in counts]
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path.relative_to(ROOT)} ({counts.size} steps)")


def chain_app(name: str, n: int, et_low: float, et_high: float, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    et = rng.uniform(et_low, et_high, size=n).round(1)
    return {
        "name": name,
        "microservices": [{"id": i, "et_ms": float(et[i])} for i in range(n)],
        "edges": [[i, i + 1] for i in range(n - 1)],
    }


def layered_app(name: str, n: int, seed: int, et_low: float = 1000.0, et_high: float = 5000.0) -> dict:
    """Random layered DAG: every non-root has a predecessor in the previous
    layer and every non-leaf a successor in the next."""
    rng = np.random.default_rng(seed)
    layer_count = max(3, int(round(np.sqrt(n))) + 1)
    sizes = np.ones(layer_count, dtype=int)
    for _ in range(n - layer_count):
        sizes[rng.integers(1, layer_count - 1) if layer_count > 2 else 0] += 1
    layers: list[list[int]] = []
    nxt = 0
    for s in sizes:
        layers.append(list(range(nxt, nxt + s)))
        nxt += s
    edges: set[tuple[int, int]] = set()
    for prev, cur in zip(layers, layers[1:]):
        for node in cur:
            edges.add((int(rng.choice(prev)), node))
        for node in prev:
            if not any(e[0] == node for e in edges):
                edges.add((node, int(rng.choice(cur))))
        extra = rng.integers(0, len(prev) * len(cur) // 2 + 1)
        for _ in range(extra):
            edges.add((int(rng.choice(prev)), int(rng.choice(cur))))
    et = rng.uniform(et_low, et_high, size=n).round(1)
    return {
        "name": name,
        "microservices": [{"id": i, "et_ms": float(et[i])} for i in range(n)],
        "edges": sorted([list(e) for e in edges]),
    }


def toy_bursty(steps: int = 40) -> np.ndarray:
    rng = np.random.default_rng(11)
    base = np.full(steps, 3)
    base[10:18] = 12
    base[18:23] = 4
    base[23:31] = 14
    base[31:] = 3
    noise = rng.integers(-1, 2, size=steps)
    return np.clip(base + noise, 0, None)


def diurnal(steps: int = 960, base: float = 60.0, amp: float = 40.0, seed: int = 21) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = np.arange(steps)
    wave = base + amp * np.sin(2 * np.pi * t / 480.0 - np.pi / 2)
    noise = rng.normal(0.0, 6.0, size=steps)
    return np.clip(np.round(wave + noise), 0, None).astype(int)


def bursty(steps: int = 960, seed: int = 31) -> np.ndarray:
    rng = np.random.default_rng(seed)
    counts = rng.poisson(40.0, size=steps).astype(float)
    for start in rng.integers(0, steps - 30, size=8):
        counts[start:start + 20] += rng.integers(60, 120)
    return counts.astype(int)


def main() -> None:
    write_json(DATA / "apps" / "chain5.json", chain_app("chain5", 5, 15000.0, 35000.0, seed=5))
    for n in (11, 12, 13, 14, 30):
        write_json(DATA / "apps" / f"a{n}.json", layered_app(f"a{n}", n, seed=100 + n))

    write_trace(DATA / "traces" / "toy_bursty_40.csv", toy_bursty())
    write_trace(DATA / "traces" / "diurnal_960.csv", diurnal())
    write_trace(DATA / "traces" / "bursty_960.csv", bursty())

    # idle floor: 3 m5.4xlarge for 40 steps x 180 s = 2 h -> 3 * 0.768 * 2 = 4.608 USD
    write_json(DATA / "scenarios" / "toy.json", {
        "name": "toy-chain5",
        "app_file": "../apps/chain5.json",
        "trace_file": "../traces/toy_bursty_40.csv",
        "vm_catalog": "default",
        "pm_count": 4,
        "initial_vm_type": "m5.4xlarge",
        "initial_vm_count": 3,
        "decision_interval_s": 180,
        "transient": {"h_delay_s": 30, "v_delay_s": 1},
        "budget_usd": 9.216,
        "rho": 100,
        "split": "all",
    })
    write_json(DATA / "scenarios" / "a11_diurnal.json", {
        "name": "a11-diurnal",
        "app_file": "../apps/a11.json",
        "trace_file": "../traces/diurnal_960.csv",
        "vm_catalog": "default",
        "pm_count": 8,
        "initial_vm_type": "m5.4xlarge",
        "initial_vm_count": 3,
        "decision_interval_s": 180,
        "transient": {"h_delay_s": 30, "v_delay_s": 1},
        "budget_usd": 200,
        "rho": 100,
        "split": "test",
    })
    write_json(DATA / "scenarios" / "a13_bursty.json", {
        "name": "a13-bursty",
        "app_file": "../apps/a13.json",
        "trace_file": "../traces/bursty_960.csv",
        "vm_catalog": "default",
        "pm_count": 8,
        "initial_vm_type": "m5.4xlarge",
        "initial_vm_count": 3,
        "decision_interval_s": 180,
        "transient": {"h_delay_s": 30, "v_delay_s": 1},
        "budget_usd": 200,
        "rho": 100,
        "split": "test",
    })


if __name__ == "__main__":
    main()
