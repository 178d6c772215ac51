"""Mapping between discrete architecture genotypes and the unit cube.

Each axis of a discrete space holds an ordered list of admissible values.
A genotype (one choice per axis) encodes to a vector in [0, 1]^m by the
normalized index of each choice, and any real vector decodes back to the
nearest genotype, so a continuous optimizer can search a categorical space.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from .de_core import ensure_rng


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError(f"axis {self.name!r} needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"axis {self.name!r} has duplicate values")

    @property
    def size(self) -> int:
        return len(self.values)

    def index_of(self, value) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise ValueError(f"value {value!r} is not admissible on axis {self.name!r}") from None


@dataclass(frozen=True)
class Genotype:
    """One choice per axis of a discrete space."""

    choices: tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))


@dataclass(frozen=True)
class DiscreteSpace:
    axes: tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("a discrete space needs at least one axis")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("axis names must be unique")

    @property
    def num_axes(self) -> int:
        return len(self.axes)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        n = 1
        for a in self.axes:
            n *= a.size
        return n

    def indices_of(self, genotype: Genotype) -> np.ndarray:
        if len(genotype.choices) != self.num_axes:
            raise ValueError("genotype length does not match the space")
        return np.array(
            [a.index_of(c) for a, c in zip(self.axes, genotype.choices)], dtype=int
        )

    def genotype_from_indices(self, indices) -> Genotype:
        return Genotype(tuple(a.values[int(i)] for a, i in zip(self.axes, indices)))

    def random_genotype(self, rng) -> Genotype:
        rng = ensure_rng(rng)
        return Genotype(tuple(a.values[int(rng.integers(a.size))] for a in self.axes))

    def iter_genotypes(self) -> Iterator[Genotype]:
        for combo in itertools.product(*(a.values for a in self.axes)):
            yield Genotype(combo)

    def to_json_dict(self) -> dict:
        return {"axes": [{"name": a.name, "values": list(a.values)} for a in self.axes]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "DiscreteSpace":
        if not isinstance(data, dict) or "axes" not in data:
            raise ValueError("space document must be an object with an 'axes' list")
        axes = []
        for entry in data["axes"]:
            if not isinstance(entry, dict) or "name" not in entry or "values" not in entry:
                raise ValueError("each axis needs 'name' and 'values'")
            axes.append(Axis(str(entry["name"]), tuple(entry["values"])))
        return cls(tuple(axes))

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8", newline="\n"
        )

    @classmethod
    def load(cls, path) -> "DiscreteSpace":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def genotype_to_dict(genotype: Genotype, space: DiscreteSpace) -> dict:
    space.indices_of(genotype)  # membership check
    return {a.name: c for a, c in zip(space.axes, genotype.choices)}


def genotype_from_dict(data: dict, space: DiscreteSpace) -> Genotype:
    try:
        g = Genotype(tuple(data[a.name] for a in space.axes))
    except KeyError as exc:
        raise ValueError(f"genotype document is missing axis {exc.args[0]!r}") from None
    space.indices_of(g)
    return g


def encode(genotype: Genotype, space: DiscreteSpace) -> np.ndarray:
    """Map a genotype to [0, 1]^m by normalized value index.

    A choice at index k on an axis with n values maps to k / (n - 1).
    Single-value axes carry no search information and map to 0.5.
    """
    indices = space.indices_of(genotype)
    out = np.empty(space.num_axes, dtype=float)
    for i, axis in enumerate(space.axes):
        out[i] = 0.5 if axis.size == 1 else indices[i] / (axis.size - 1)
    return out


def decode(u, space: DiscreteSpace) -> Genotype:
    """Map any real vector to the genotype with the nearest encoding.

    Coordinates are clamped into [0, 1] first; index ties round half away
    from zero, i.e. toward the higher index.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (space.num_axes,):
        raise ValueError("vector length does not match the space")
    clamped = np.clip(u, 0.0, 1.0)
    indices = []
    for i, axis in enumerate(space.axes):
        indices.append(0 if axis.size == 1 else int(np.floor(clamped[i] * (axis.size - 1) + 0.5)))
    return space.genotype_from_indices(indices)


def perturb(u, sigma: float, rng) -> np.ndarray:
    """Add i.i.d. Gaussian exploration noise per coordinate, clamped to [0, 1]."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    u = np.asarray(u, dtype=float)
    rng = ensure_rng(rng)
    return np.clip(u + rng.normal(0.0, sigma, size=u.shape), 0.0, 1.0)
