"""Request traces: loading, train/test splitting, arrival generation, and
the moving-average predictor that feeds the per-container workload feature.

A trace is one non-negative integer per time unit (one decision interval,
180 s by default).  Arrival timestamps inside a step are evenly spaced unless
jitter is enabled, in which case offsets come from a generator keyed by
``(seed, step)`` so replays are bit-reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class TraceError(ValueError):
    """Malformed or empty trace file."""


@dataclass(frozen=True)
class Trace:
    name: str
    counts: np.ndarray  # int64, one entry per time unit

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 1:
            raise TraceError(f"trace {self.name!r} must hold at least one count")
        if (counts < 0).any():
            raise TraceError(f"trace {self.name!r} has negative counts")
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return int(self.counts.size)


def load_trace(path: str | Path) -> Trace:
    """Read a single-column CSV of request counts; optional one-line header."""
    path = Path(path)
    counts: list[int] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError:
                if lineno == 1:  # header row
                    continue
                raise TraceError(f"{path}:{lineno}: not an integer: {text!r}") from None
            if value < 0:
                raise TraceError(f"{path}:{lineno}: negative count {value}")
            counts.append(value)
    if not counts:
        raise TraceError(f"{path}: no request counts found")
    return Trace(name=path.stem, counts=np.asarray(counts, dtype=np.int64))


def split_train_test(trace: Trace) -> tuple[Trace, Trace]:
    """First 480 units for training (first half for shorter traces), rest for test."""
    n = len(trace)
    if n < 2:
        raise TraceError(f"trace {trace.name!r} too short to split (length {n})")
    train_n = 480 if n >= 960 else n // 2
    return (
        Trace(f"{trace.name}-train", trace.counts[:train_n]),
        Trace(f"{trace.name}-test", trace.counts[train_n:]),
    )


def arrivals_in_step(
    counts: np.ndarray,
    step: int,
    *,
    interval_s: float = 180.0,
    jitter_seed: int | None = None,
) -> np.ndarray:
    """Arrival timestamps (seconds) for one step of a trace.

    Evenly spaced across the interval by default; with ``jitter_seed`` set,
    offsets are sorted uniform draws keyed by ``(seed, step)``.
    """
    counts = np.asarray(counts)
    if step < 0 or step >= counts.size:
        raise IndexError(f"step {step} outside trace of length {counts.size}")
    n = int(counts[step])
    base = step * interval_s
    if n == 0:
        return np.empty(0, dtype=np.float64)
    if jitter_seed is None:
        offsets = np.arange(n, dtype=np.float64) * (interval_s / n)
    else:
        rng = np.random.default_rng([jitter_seed, step])
        offsets = np.sort(rng.uniform(0.0, interval_s, size=n))
    return base + offsets


@dataclass
class WorkloadHistory:
    """Ring buffer of recent per-step request counts for one microservice."""

    window: int = 5
    _buffer: deque = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be at least 1")
        self._buffer = deque(maxlen=self.window)

    def push(self, count: float) -> None:
        self._buffer.append(float(count))

    def __len__(self) -> int:
        return len(self._buffer)

    def values(self) -> list[float]:
        return list(self._buffer)


def sma_predict(history: WorkloadHistory) -> float:
    """Simple moving average of the buffered counts."""
    if len(history) == 0:
        raise ValueError("cannot predict from an empty workload history")
    values = history.values()
    return sum(values) / len(values)
