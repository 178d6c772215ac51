"""Architecture search over discrete spaces through continuous encodings.

Genotypes are mapped into the unit cube, evolved with the adaptive DE core
(donors recombine with the current best encoding), decoded back and scored
through a predictor. Scores are memoized per genotype and every distinct
genotype counts exactly once against the sampled-architecture budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .de_core import Bounds, ensure_rng
from .discrete_codec import DiscreteSpace, Axis, Genotype, decode, encode, genotype_to_dict, perturb
from .shsade import (
    CURRENT_TO_PBEST,
    ParameterMemories,
    ShsadeConfig,
    ShsadeState,
    StrategyState,
    build_trials,
    commit_generation,
)
from .trace import SearchTrace

MAX_ENUMERATION = 10**6


@runtime_checkable
class PredictorInterface(Protocol):
    """Pure, total estimators of a genotype's accuracy and cost."""

    def predict_accuracy(self, genotype: Genotype) -> float: ...

    def predict_cost(self, genotype: Genotype) -> float: ...


@dataclass(frozen=True)
class BiObjectiveConfig:
    """Scalarization of the accuracy/cost trade-off.

    Fitness is -accuracy * min(1, cost_budget / cost) ** omega: architectures
    at or under budget pay no penalty, over-budget ones are discounted, and
    omega = 0 reduces to pure accuracy maximization.
    """

    cost_budget: float
    omega: float = 1.0

    def __post_init__(self):
        if not self.cost_budget > 0:
            raise ValueError("cost_budget must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")


def score(genotype: Genotype, predictor: PredictorInterface, config: BiObjectiveConfig) -> float:
    """Minimization fitness: lower is better."""
    accuracy = float(predictor.predict_accuracy(genotype))
    cost = float(predictor.predict_cost(genotype))
    if cost <= config.cost_budget:
        penalty = 1.0
    else:
        penalty = (config.cost_budget / cost) ** config.omega
    return -accuracy * penalty


@dataclass
class NasConfig:
    biobjective: BiObjectiveConfig
    shsade: ShsadeConfig | None = None
    budget: int = 500
    sigma_init_noise: float = 0.05
    # exploration noise re-applied to every trial encoding; without it a
    # converged population sits inside one decode rounding cell and stops
    # proposing new genotypes long before the budget is spent
    sigma_trial_noise: float = 0.15
    mutation_fraction: float = 1.0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.sigma_init_noise < 0 or self.sigma_trial_noise < 0:
            raise ValueError("noise sigmas must be non-negative")
        if not 0 < self.mutation_fraction <= 1:
            raise ValueError("mutation_fraction must lie in (0, 1]")
        if self.shsade is None:
            pop = 50
            self.shsade = ShsadeConfig(
                pop_size=pop,
                max_generations=max(10, (10 * self.budget) // pop),
                crossover_target="best",
            )
        if self.budget < self.shsade.pop_size:
            raise ValueError("budget must cover at least one full population")


class BudgetedScorer:
    """Memoizing scorer; each distinct genotype costs one budget unit."""

    def __init__(self, predictor: PredictorInterface, biobjective: BiObjectiveConfig, budget: int):
        self.predictor = predictor
        self.biobjective = biobjective
        self.budget = int(budget)
        self.scores: dict[tuple, float] = {}
        self.evaluations = 0
        self.best_genotype: Genotype | None = None
        self.best_score = math.inf

    def try_score(self, genotype: Genotype) -> float | None:
        """Score a genotype, or return None when it is unseen and the budget
        is spent. Repeated genotypes never consume budget."""
        key = genotype.choices
        cached = self.scores.get(key)
        if cached is not None:
            return cached
        if self.evaluations >= self.budget:
            return None
        value = score(genotype, self.predictor, self.biobjective)
        self.scores[key] = value
        self.evaluations += 1
        if value < self.best_score:
            self.best_score = value
            self.best_genotype = genotype
        return value


def nas_evolve(
    space: DiscreteSpace,
    predictor: PredictorInterface,
    config: NasConfig,
    rng=None,
) -> tuple[Genotype, SearchTrace]:
    """Evolve continuous encodings of a discrete space against a predictor.

    The population starts from random genotypes, encoded with Gaussian
    exploration noise. Each generation mutates (a configurable fraction of)
    the population, recombines donors with the current best encoding, decodes
    the trials and scores them under the architecture budget; trials that
    would exceed the budget are dropped and their parents survive. The run
    stops once the budget is spent, the whole space has been scored, or the
    generation cap is reached, and returns the best genotype ever scored.
    """
    rng = ensure_rng(rng)
    sh = config.shsade
    scorer = BudgetedScorer(predictor, config.biobjective, config.budget)
    m = space.num_axes
    bounds = Bounds(np.zeros(m), np.ones(m))

    x0 = np.empty((sh.pop_size, m))
    f0 = np.empty(sh.pop_size)
    for i in range(sh.pop_size):
        seed_genotype = space.random_genotype(rng)
        x0[i] = perturb(encode(seed_genotype, space), config.sigma_init_noise, rng)
        value = scorer.try_score(decode(x0[i], space))
        assert value is not None  # budget >= pop_size makes initialization affordable
        f0[i] = value

    best_idx = int(np.argmin(f0))
    strategy = (
        StrategyState.uniform(2) if sh.use_trigonometric else StrategyState.single(CURRENT_TO_PBEST, 2)
    )
    state = ShsadeState(
        x=x0,
        fitness=f0,
        bounds=bounds,
        memories=ParameterMemories.initial(sh.memory_size, freq=sh.freq_init),
        strategy=strategy,
        archive=[],
        archive_capacity=sh.resolved_archive_capacity(),
        generation=0,
        evaluations=sh.pop_size,
        best_x=x0[best_idx].copy(),
        best_fitness=float(f0[best_idx]),
        config=sh,
    )

    trace = SearchTrace(metadata={"algorithm": "shsade_pids"})
    trace.append(0, scorer.evaluations, scorer.best_score, float(np.mean(f0)))

    while (
        state.generation < sh.max_generations
        and scorer.evaluations < config.budget
        and scorer.evaluations < space.size
    ):
        batch = build_trials(state, rng)
        if config.sigma_trial_noise > 0:
            batch.x = np.clip(
                batch.x + rng.normal(0.0, config.sigma_trial_noise, size=batch.x.shape), 0.0, 1.0
            )
        trial_fitness = np.full(sh.pop_size, np.inf)
        evaluated = np.zeros(sh.pop_size, dtype=bool)
        if config.mutation_fraction < 1.0:
            count = max(1, round(config.mutation_fraction * sh.pop_size))
            rows = np.sort(rng.choice(sh.pop_size, size=count, replace=False))
        else:
            rows = np.arange(sh.pop_size)
        for i in rows:
            value = scorer.try_score(decode(batch.x[i], space))
            if value is None:
                continue  # budget spent; this parent survives unchallenged
            trial_fitness[i] = value
            evaluated[i] = True
        commit_generation(state, batch, trial_fitness, rng, evaluated)
        trace.append(
            state.generation, scorer.evaluations, scorer.best_score, float(np.mean(state.fitness))
        )

    assert scorer.best_genotype is not None
    return scorer.best_genotype, trace


def brute_force_optimum(
    space: DiscreteSpace,
    predictor: PredictorInterface,
    config: BiObjectiveConfig,
) -> tuple[Genotype, list[tuple[Genotype, float]]]:
    """Exhaustively score every genotype; ties break by lexicographic index
    order. Test oracle for the evolutionary pipeline, guarded to 10^6 configs."""
    if space.size > MAX_ENUMERATION:
        raise ValueError(f"space has {space.size} configurations, enumeration caps at {MAX_ENUMERATION}")
    scored = []
    for indices in itertools.product(*(range(a.size) for a in space.axes)):
        genotype = space.genotype_from_indices(indices)
        scored.append((score(genotype, predictor, config), indices, genotype))
    scored.sort(key=lambda item: (item[0], item[1]))
    ranking = [(genotype, value) for value, _, genotype in scored]
    return ranking[0][0], ranking


def pids_space(
    num_blocks: int = 7,
    widths=(16, 24, 32, 48, 64),
    expansions=(1, 2, 3, 4),
    depths=(1, 2, 3),
    interaction_orders=(1, 2),
) -> DiscreteSpace:
    """Joint interaction/width/depth/expansion space: per block, one axis for
    the channel width, the expansion ratio, the depth multiplier and the
    point-interaction order."""
    if num_blocks < 1:
        raise ValueError("num_blocks must be positive")
    axes = []
    for b in range(num_blocks):
        axes.append(Axis(f"block{b}_width", tuple(widths)))
        axes.append(Axis(f"block{b}_expansion", tuple(expansions)))
        axes.append(Axis(f"block{b}_depth", tuple(depths)))
        axes.append(Axis(f"block{b}_interaction", tuple(interaction_orders)))
    return DiscreteSpace(tuple(axes))


def result_document(
    best: Genotype, best_score: float, evaluations: int, trace: SearchTrace, space: DiscreteSpace
) -> dict:
    """JSON-ready search result: best genotype keyed by axis name, its score,
    the budget consumed and the full trace rows."""
    return {
        "best_genotype": genotype_to_dict(best, space),
        "best_score": float(best_score),
        "evaluations": int(evaluations),
        "trace": [list(row.as_tuple()) for row in trace.rows],
    }
