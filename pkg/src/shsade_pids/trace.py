"""Per-generation search traces with a stable CSV on-disk form.

Every optimizer in this package emits the same four-column record so that
runs of different algorithms can be compared point for point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

COLUMNS = ("generation", "evaluations", "best_fitness", "mean_fitness")


class TraceError(ValueError):
    """Raised when trace rows violate the trace invariants or CSV schema."""


@dataclass
class TraceRow:
    generation: int
    evaluations: int
    best_fitness: float
    mean_fitness: float

    def as_tuple(self) -> tuple:
        return (self.generation, self.evaluations, self.best_fitness, self.mean_fitness)


class SearchTrace:
    """Append-only record of (generation, evaluations, best, mean) rows.

    Two invariants hold at all times: evaluation counts strictly increase
    down the rows and the best fitness never increases. Appending a row at
    an unchanged evaluation count replaces the previous row, so generations
    that consumed no new evaluations collapse into a single record.
    """

    def __init__(self, metadata: dict | None = None):
        self.metadata: dict[str, str] = {str(k): str(v) for k, v in (metadata or {}).items()}
        self.rows: list[TraceRow] = []

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, generation, evaluations, best_fitness, mean_fitness) -> None:
        row = TraceRow(int(generation), int(evaluations), float(best_fitness), float(mean_fitness))
        if not math.isfinite(row.best_fitness) or not math.isfinite(row.mean_fitness):
            raise TraceError("trace rows require finite fitness values")
        if self.rows:
            last = self.rows[-1]
            if row.evaluations < last.evaluations:
                raise TraceError("evaluation counts must not decrease")
            if row.best_fitness > last.best_fitness:
                raise TraceError("best fitness must not increase")
            if row.evaluations == last.evaluations:
                self.rows[-1] = row
                return
        self.rows.append(row)

    @property
    def final_best(self) -> float:
        if not self.rows:
            raise TraceError("empty trace")
        return self.rows[-1].best_fitness

    @property
    def final_evaluations(self) -> int:
        if not self.rows:
            raise TraceError("empty trace")
        return self.rows[-1].evaluations

    def best_at(self, evaluations: int) -> float:
        """Best fitness recorded at or before the given evaluation count."""
        best = None
        for row in self.rows:
            if row.evaluations <= evaluations:
                best = row.best_fitness
            else:
                break
        if best is None:
            raise TraceError(f"no trace rows at or before {evaluations} evaluations")
        return best

    def validate(self) -> None:
        prev = None
        for row in self.rows:
            if not math.isfinite(row.best_fitness) or not math.isfinite(row.mean_fitness):
                raise TraceError("non-finite fitness in trace")
            if prev is not None:
                if row.evaluations <= prev.evaluations:
                    raise TraceError("evaluations not strictly increasing")
                if row.best_fitness > prev.best_fitness:
                    raise TraceError("best fitness increased")
            prev = row

    def write_csv(self, path) -> None:
        self.validate()
        lines = []
        for key in sorted(self.metadata):
            lines.append(f"# {key}: {self.metadata[key]}")
        lines.append(",".join(COLUMNS))
        for row in self.rows:
            lines.append(
                f"{row.generation},{row.evaluations},"
                f"{float(row.best_fitness)!r},{float(row.mean_fitness)!r}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    @classmethod
    def read_csv(cls, path) -> "SearchTrace":
        text = Path(path).read_text(encoding="utf-8")
        trace = cls()
        header_seen = False
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if not sep:
                    raise TraceError(f"{path}:{lineno}: malformed metadata line")
                trace.metadata[key.strip()] = value.strip()
                continue
            if not header_seen:
                if tuple(line.split(",")) != COLUMNS:
                    raise TraceError(f"{path}:{lineno}: unexpected header {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != len(COLUMNS):
                raise TraceError(f"{path}:{lineno}: expected {len(COLUMNS)} columns")
            try:
                trace.rows.append(
                    TraceRow(int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]))
                )
            except ValueError as exc:
                raise TraceError(f"{path}:{lineno}: {exc}") from None
        if not header_seen:
            raise TraceError(f"{path}: missing column header")
        trace.validate()
        return trace
