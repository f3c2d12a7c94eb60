"""Population-based gradient estimation over the flat parameter vector.

Each generation samples N Gaussian perturbations from a counter-keyed
generator (seed, generation, index), evaluates every perturbed candidate's
episode objective, estimates the gradient as the fitness-weighted average of
the perturbations divided by (N * sigma), and applies an Adam ascent step.
Candidates may be evaluated in parallel worker processes; results are always
reduced in index order, so the worker count never changes the outcome.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

FitnessFn = Callable[[np.ndarray], tuple[float, dict]]


class TrainingError(RuntimeError):
    """Unrecoverable training failure (degenerate fitness or divergence)."""


@dataclass(frozen=True)
class ErlConfig:
    population: int = 40
    generations: int = 1000
    learning_rate: float = 0.01
    sigma: float = 0.05
    seed: int = 0
    rank_shaping: bool = False
    antithetic: bool = False
    workers: int = 1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.sigma <= 0 or self.learning_rate <= 0:
            raise ValueError("sigma and learning rate must be positive")
        if self.antithetic and self.population % 2:
            raise ValueError("antithetic sampling needs an even population")


def perturb(theta: np.ndarray, sigma: float, seed: int, gen: int, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Candidate i of a generation: theta + sigma * eps with eps drawn
    standard-normal from a generator keyed (seed, gen, index)."""
    rng = np.random.default_rng([seed, gen, index])
    eps = rng.standard_normal(theta.shape[0])
    return theta + sigma * eps, eps


def _population_noise(theta: np.ndarray, cfg: ErlConfig, gen: int) -> np.ndarray:
    rows = []
    for i in range(cfg.population):
        if cfg.antithetic and i % 2 == 1:
            rows.append(-rows[-1])
        else:
            _, eps = perturb(theta, cfg.sigma, cfg.seed, gen, i)
            rows.append(eps)
    return np.stack(rows)


def centered_ranks(values: np.ndarray) -> np.ndarray:
    """Map fitnesses to evenly spaced ranks in [-0.5, 0.5]."""
    n = values.shape[0]
    if n < 2:
        return np.zeros(n)
    ranks = np.empty(n)
    ranks[np.argsort(values)] = np.arange(n, dtype=np.float64)
    return ranks / (n - 1) - 0.5


def estimate_gradient(
    noise: np.ndarray, fitnesses: np.ndarray, sigma: float, *, rank_shaping: bool = False
) -> np.ndarray:
    """Fitness-weighted perturbation average; non-finite candidates are
    dropped (at least two finite fitnesses required)."""
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    finite = np.isfinite(fitnesses)
    if finite.sum() < 2:
        raise TrainingError("fewer than two finite fitness values in the population")
    weights = fitnesses[finite]
    if rank_shaping:
        weights = centered_ranks(weights)
    return weights @ noise[finite] / (weights.shape[0] * sigma)


class Adam:
    """Ascent-direction Adam: ``step(grad)`` returns the update to add."""

    def __init__(self, dim: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class GenerationStats:
    gen: int
    best_fitness: float
    mean_fitness: float
    best_info: dict = field(default_factory=dict)


@dataclass
class TrainResult:
    theta: np.ndarray
    curve: list[GenerationStats]


def train(
    cfg: ErlConfig,
    fitness_fn: FitnessFn,
    theta0: np.ndarray,
    *,
    pool: ProcessPoolExecutor | None = None,
    on_generation: Callable[[GenerationStats], None] | None = None,
) -> TrainResult:
    """Run the full loop; ``fitness_fn(theta) -> (fitness, info)`` must be a
    pure function of its argument for reproducibility."""
    theta = np.asarray(theta0, dtype=np.float64).copy()
    adam = Adam(theta.shape[0], cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    curve: list[GenerationStats] = []
    for gen in range(cfg.generations):
        noise = _population_noise(theta, cfg, gen)
        candidates = theta[None, :] + cfg.sigma * noise
        if pool is not None:
            results = list(pool.map(fitness_fn, candidates))
        else:
            results = [fitness_fn(c) for c in candidates]
        fits = np.asarray([r[0] for r in results])
        finite = np.isfinite(fits)
        if not finite.any():
            raise TrainingError(f"generation {gen}: every candidate failed")
        grad = estimate_gradient(noise, fits, cfg.sigma, rank_shaping=cfg.rank_shaping)
        theta += adam.step(grad)
        if not np.isfinite(theta).all():
            raise TrainingError(f"generation {gen}: parameters became non-finite")
        best = int(np.argmax(np.where(finite, fits, -np.inf)))
        stats = GenerationStats(
            gen=gen,
            best_fitness=float(fits[best]),
            mean_fitness=float(fits[finite].mean()),
            best_info=results[best][1],
        )
        curve.append(stats)
        if on_generation is not None:
            on_generation(stats)
    return TrainResult(theta=theta, curve=curve)
