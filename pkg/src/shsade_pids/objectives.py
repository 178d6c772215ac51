"""Validation objectives: analytic benchmarks and seeded tabular surrogates.

The benchmarks carry known optima so optimizer runs can be checked against
ground truth; the surrogates give architecture spaces an enumerable, fully
deterministic accuracy/cost landscape with pairwise interactions, standing in
for a trained performance predictor.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .de_core import Bounds, ObjectiveSpec
from .discrete_codec import DiscreteSpace, Genotype


def _sphere(xs: np.ndarray) -> np.ndarray:
    return np.sum(xs * xs, axis=1)


def _rosenbrock(xs: np.ndarray) -> np.ndarray:
    a = xs[:, :-1]
    b = xs[:, 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2, axis=1)


def _rastrigin(xs: np.ndarray) -> np.ndarray:
    return 10.0 * xs.shape[1] + np.sum(xs * xs - 10.0 * np.cos(2.0 * np.pi * xs), axis=1)


def _ackley(xs: np.ndarray) -> np.ndarray:
    d = xs.shape[1]
    return (
        -20.0 * np.exp(-0.2 * np.sqrt(np.sum(xs * xs, axis=1) / d))
        - np.exp(np.sum(np.cos(2.0 * np.pi * xs), axis=1) / d)
        + 20.0
        + np.exp(1.0)
    )


# conventional CEC-style domains per function
_BENCHMARKS = {
    "sphere": (_sphere, (-5.12, 5.12)),
    "rosenbrock": (_rosenbrock, (-5.0, 10.0)),
    "rastrigin": (_rastrigin, (-5.12, 5.12)),
    "ackley": (_ackley, (-32.768, 32.768)),
}

BENCHMARK_NAMES = tuple(sorted(_BENCHMARKS))


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    dimension: int
    bounds: Bounds
    optimum_x: np.ndarray
    optimum_value: float

    def evaluate(self, x) -> float:
        batch = _BENCHMARKS[self.name][0]
        return float(batch(np.asarray(x, dtype=float)[None, :])[0])

    def evaluate_many(self, xs) -> np.ndarray:
        return _BENCHMARKS[self.name][0](np.asarray(xs, dtype=float))

    def to_objective_spec(self) -> ObjectiveSpec:
        return ObjectiveSpec(
            dimension=self.dimension,
            bounds=self.bounds,
            evaluator=self.evaluate,
            batch_evaluator=self.evaluate_many,
        )


def make_benchmark(name: str, dimension: int) -> BenchmarkFunction:
    if name not in _BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}; choose from {BENCHMARK_NAMES}")
    if dimension < 1:
        raise ValueError("dimension must be positive")
    if name == "rosenbrock" and dimension < 2:
        raise ValueError("rosenbrock needs at least two dimensions")
    lo, hi = _BENCHMARKS[name][1]
    optimum = np.ones(dimension) if name == "rosenbrock" else np.zeros(dimension)
    return BenchmarkFunction(
        name=name,
        dimension=dimension,
        bounds=Bounds.cube(lo, hi, dimension),
        optimum_x=optimum,
        optimum_value=0.0,
    )


def eval_benchmark(f: BenchmarkFunction, x) -> float:
    return f.evaluate(x)


_BLOCK_AXIS = re.compile(r"^(?P<block>.+)_(?P<role>width|expansion|depth)$")


def _cost_factor(axis, index: int) -> float:
    value = axis.values[index]
    if isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0:
        return float(value)
    return float(index + 1)


class TabularSurrogate:
    """Deterministic accuracy/cost tables over a discrete space.

    Accuracy is the logistic of a sum of seeded per-axis weights plus seeded
    pairwise interaction terms, so axis-wise greedy search is not optimal and
    a searcher has to combine choices. Cost sums a width * expansion * depth
    product per block for axes named ``<block>_width`` (and so on) and a
    seeded positive per-axis term for everything else; it strictly increases
    along every axis's value order. Rebuilding from the same seed reproduces
    identical tables.
    """

    def __init__(self, space: DiscreteSpace, seed: int):
        self.space = space
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        m = space.num_axes
        n_pairs = max(1, m * (m - 1) // 2)
        main_sd = 2.0 / np.sqrt(m)
        pair_sd = 1.6 / np.sqrt(n_pairs)
        self._axis_weights = [rng.normal(0.0, main_sd, size=a.size) for a in space.axes]
        self._pair_tables = {}
        for i in range(m):
            for j in range(i + 1, m):
                self._pair_tables[(i, j)] = rng.normal(
                    0.0, pair_sd, size=(space.axes[i].size, space.axes[j].size)
                )
        self._cost_weights = rng.uniform(0.5, 1.5, size=m)

        # axes following the <block>_{width,expansion,depth} convention cost a
        # per-block product; any other axis contributes an additive term
        self._blocks: dict[str, list[int]] = {}
        self._additive_axes: list[int] = []
        for i, axis in enumerate(space.axes):
            match = _BLOCK_AXIS.match(axis.name)
            if match:
                self._blocks.setdefault(match.group("block"), []).append(i)
            else:
                self._additive_axes.append(i)

    def predict_accuracy(self, genotype: Genotype) -> float:
        idx = self.space.indices_of(genotype)
        z = 0.0
        for i, weights in enumerate(self._axis_weights):
            z += weights[idx[i]]
        for (i, j), table in self._pair_tables.items():
            z += table[idx[i], idx[j]]
        return float(1.0 / (1.0 + np.exp(-z)))

    def predict_cost(self, genotype: Genotype) -> float:
        idx = self.space.indices_of(genotype)
        cost = 0.0
        for axes in self._blocks.values():
            product = 1.0
            for i in axes:
                product *= _cost_factor(self.space.axes[i], idx[i])
            cost += product
        for i in self._additive_axes:
            cost += self._cost_weights[i] * (idx[i] + 1)
        return float(cost)

    def predict(self, genotype: Genotype) -> tuple[float, float]:
        return self.predict_accuracy(genotype), self.predict_cost(genotype)

    def to_json_dict(self) -> dict:
        return {"space": self.space.to_json_dict(), "seed": self.seed}

    @classmethod
    def from_json_dict(cls, data: dict) -> "TabularSurrogate":
        if not isinstance(data, dict) or "space" not in data or "seed" not in data:
            raise ValueError("surrogate document needs 'space' and 'seed'")
        return cls(DiscreteSpace.from_json_dict(data["space"]), int(data["seed"]))

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8", newline="\n"
        )

    @classmethod
    def load(cls, path) -> "TabularSurrogate":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def surrogate_predict(surrogate: TabularSurrogate, genotype: Genotype) -> tuple[float, float]:
    """(accuracy in [0, 1], cost > 0) for a membership-valid genotype."""
    return surrogate.predict(genotype)
