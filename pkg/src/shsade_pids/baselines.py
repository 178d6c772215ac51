"""Comparison baselines: fixed-parameter DE and aging (regularized) evolution.

Both emit traces schema-identical to the adaptive optimizer's so convergence
curves line up point for point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .de_core import (
    MIN_POP_SIZE,
    Individual,
    ObjectiveSpec,
    binomial_crossover_matrix,
    ensure_rng,
    init_population,
    repair_bounds_matrix,
    sample_distinct_triplets,
)
from .discrete_codec import DiscreteSpace, Genotype
from .nas_search import BiObjectiveConfig, BudgetedScorer, PredictorInterface
from .shsade import Termination
from .trace import SearchTrace


@dataclass(frozen=True)
class VanillaDeConfig:
    """Classic rand/1/bin with fixed control parameters."""

    f: float = 0.5
    cr: float = 0.9
    pop_size: int = 50
    max_generations: int = 1000

    def __post_init__(self):
        if not 0 < self.f <= 1:
            raise ValueError("f must lie in (0, 1]")
        if not 0 <= self.cr <= 1:
            raise ValueError("cr must lie in [0, 1]")
        if self.pop_size < MIN_POP_SIZE:
            raise ValueError(f"pop_size must be at least {MIN_POP_SIZE}")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")


def vanilla_de_run(
    config: VanillaDeConfig,
    spec: ObjectiveSpec,
    termination: Termination | None = None,
    rng=None,
) -> tuple[Individual, SearchTrace]:
    """Fixed-parameter DE sharing the core primitives and trace format."""
    term = termination or Termination()
    rng = ensure_rng(rng)
    pop = init_population(spec, config.pop_size, rng)
    x, fitness = pop.as_arrays()
    pop_size = config.pop_size
    rows = np.arange(pop_size)
    cr = np.full(pop_size, config.cr)

    best_idx = int(np.argmin(fitness))
    best_x = x[best_idx].copy()
    best_fitness = float(fitness[best_idx])
    evaluations = pop_size
    generation = 0

    trace = SearchTrace(metadata={"algorithm": "vanilla_de"})
    trace.append(0, evaluations, best_fitness, float(np.mean(fitness)))

    gen_limit = config.max_generations
    if term.max_generations is not None:
        gen_limit = min(gen_limit, term.max_generations)
    while generation < gen_limit:
        if term.target_fitness is not None and best_fitness <= term.target_fitness:
            break
        if term.max_evaluations is not None and evaluations + pop_size > term.max_evaluations:
            break
        r1, r2, r3 = sample_distinct_triplets(pop_size, rows, rng)
        donors = x[r1] + config.f * (x[r2] - x[r3])
        trials = binomial_crossover_matrix(x, donors, cr, rng)
        trials = repair_bounds_matrix(trials, spec.bounds, x)
        trial_fitness = spec.evaluate_many(trials)
        accepted = trial_fitness <= fitness
        x[accepted] = trials[accepted]
        fitness[accepted] = trial_fitness[accepted]
        evaluations += pop_size
        generation += 1
        idx = int(np.argmin(fitness))
        if fitness[idx] < best_fitness:
            best_fitness = float(fitness[idx])
            best_x = x[idx].copy()
        trace.append(generation, evaluations, best_fitness, float(np.mean(fitness)))

    return Individual(best_x, best_fitness, True), trace


@dataclass(frozen=True)
class RegularizedEaConfig:
    """Aging evolution: tournament parent selection, a one-axis mutation,
    and removal of the oldest individual."""

    population_size: int = 25
    tournament_size: int = 5
    budget: int = 500
    max_steps: int | None = None  # None resolves to 40 * budget

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValueError("tournament_size must lie in [1, population_size]")
        if self.budget < self.population_size:
            raise ValueError("budget must cover the initial population")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")

    def resolved_max_steps(self) -> int:
        return 40 * self.budget if self.max_steps is None else int(self.max_steps)


def mutate_one_axis(genotype: Genotype, space: DiscreteSpace, rng) -> Genotype:
    """Replace one uniformly chosen axis with a uniform draw from its values."""
    rng = ensure_rng(rng)
    axis_idx = int(rng.integers(space.num_axes))
    axis = space.axes[axis_idx]
    choices = list(genotype.choices)
    choices[axis_idx] = axis.values[int(rng.integers(axis.size))]
    return Genotype(tuple(choices))


def regularized_ea_run(
    space: DiscreteSpace,
    predictor: PredictorInterface,
    config: RegularizedEaConfig,
    biobjective: BiObjectiveConfig,
    rng=None,
) -> tuple[Genotype, SearchTrace]:
    """Aging-evolution search with the same budget accounting as the
    evolutionary pipeline: memoized scores, one budget unit per distinct
    genotype. The population is a FIFO queue of constant size after warm-up."""
    rng = ensure_rng(rng)
    scorer = BudgetedScorer(predictor, biobjective, config.budget)

    population: list[tuple[Genotype, float]] = []
    for _ in range(config.population_size):
        genotype = space.random_genotype(rng)
        value = scorer.try_score(genotype)
        assert value is not None  # budget >= population_size
        population.append((genotype, value))

    trace = SearchTrace(metadata={"algorithm": "regularized_ea"})
    mean = float(np.mean([v for _, v in population]))
    trace.append(0, scorer.evaluations, scorer.best_score, mean)

    steps = 0
    max_steps = config.resolved_max_steps()
    while (
        scorer.evaluations < config.budget
        and scorer.evaluations < space.size
        and steps < max_steps
    ):
        picks = rng.choice(config.population_size, size=config.tournament_size, replace=False)
        parent = min((population[int(i)] for i in picks), key=lambda item: item[1])
        child = mutate_one_axis(parent[0], space, rng)
        value = scorer.try_score(child)
        assert value is not None  # loop guard leaves budget for one new genotype
        population.append((child, value))
        population.pop(0)  # oldest dies
        steps += 1
        mean = float(np.mean([v for _, v in population]))
        trace.append(steps, scorer.evaluations, scorer.best_score, mean)

    assert scorer.best_genotype is not None
    return scorer.best_genotype, trace
