"""Real-coded genetic algorithm used to initialise samplers and to fit
mixture weights: tournament selection, blend crossover, Gaussian mutation,
and elitism (so the best objective value never worsens across generations)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 48
    generations: int = 60
    elite: int = 2
    tournament: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_scale: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.population < 2 or self.generations < 1:
            raise ValueError("population must be >= 2 and generations >= 1")
        if not 0 < self.elite <= self.population:
            raise ValueError("elite count must lie in 1..population")


@dataclass(frozen=True, eq=False)
class GAResult:
    x: np.ndarray
    value: float
    history: np.ndarray  # best objective after each generation


def _evaluate(objective, pop: np.ndarray) -> np.ndarray:
    vals = np.array(objective(pop), dtype=float).reshape(-1)  # copy: may be device-backed
    vals[~np.isfinite(vals)] = np.inf
    return vals


def minimize(objective, initial: np.ndarray, config: OptimizerConfig = OptimizerConfig()) -> GAResult:
    """Minimise a batched objective over real vectors.

    `objective` maps a (P, d) population to a length-P value vector; `initial`
    seeds the search and is padded / truncated to the configured population
    size by jittering rows. Runs are deterministic for a fixed config seed.
    """
    rng = np.random.default_rng(config.seed)
    pop = np.atleast_2d(np.asarray(initial, dtype=float)).copy()
    d = pop.shape[1]
    if pop.shape[0] < config.population:
        extra_idx = rng.integers(0, pop.shape[0], size=config.population - pop.shape[0])
        jitter = rng.normal(0.0, 0.1, size=(extra_idx.size, d))
        pop = np.vstack([pop, pop[extra_idx] + jitter])

    vals = _evaluate(objective, pop)
    order = np.argsort(vals, kind="stable")
    pop, vals = pop[order][: config.population], vals[order][: config.population]

    history = []
    for _ in range(config.generations):
        spread = pop.std(axis=0) + 1e-8
        children = np.empty((config.population - config.elite, d))
        for i in range(children.shape[0]):
            a = _tournament(rng, vals, config.tournament)
            if rng.random() < config.crossover_rate:
                b = _tournament(rng, vals, config.tournament)
                u = rng.uniform(-0.25, 1.25, size=d)  # blend beyond the parents
                child = pop[a] + u * (pop[b] - pop[a])
            else:
                child = pop[a].copy()
            mask = rng.random(d) < config.mutation_rate
            child[mask] += rng.normal(0.0, config.mutation_scale * spread[mask])
            children[i] = child

        child_vals = _evaluate(objective, children)
        pop = np.vstack([pop[: config.elite], children])
        vals = np.concatenate([vals[: config.elite], child_vals])
        order = np.argsort(vals, kind="stable")
        pop, vals = pop[order], vals[order]
        history.append(vals[0])

    return GAResult(x=pop[0].copy(), value=float(vals[0]), history=np.asarray(history))


def _tournament(rng, vals: np.ndarray, k: int) -> int:
    contenders = rng.integers(0, vals.size, size=k)
    return int(contenders[np.argmin(vals[contenders])])
