"""Run configuration shared by the benchmark harness and the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .entropy import DEFAULT_BINS_1D, DEFAULT_BINS_2D, DEFAULT_LEVELS
from .permute import TABLE_ORDER, StrategyKind


@dataclass
class RunConfig:
    """Every knob of the pipeline; the JSON echo of an instance reproduces a run.

    `bins_1d`/`bins_2d` of None mean "default resolution clamped to the matrix
    dimensions" (512 and 128x128); explicit values are used as given.
    """

    matrix_paths: tuple[str, ...] = ()
    strategies: tuple[StrategyKind, ...] = TABLE_ORDER
    repeats: int = 32
    master_seed: int = 0
    bins_1d: int | None = None
    bins_2d: tuple[int, int] | None = None
    levels: tuple[int, ...] = DEFAULT_LEVELS
    target_seconds: float = 2.0
    max_workers: int = 16
    output_dir: str = "out"
    entropy_base: float = 2.0
    reuse_pool: bool = True
    column_gradient_both_axes: bool = True

    def __post_init__(self):
        self.matrix_paths = tuple(self.matrix_paths)
        self.strategies = tuple(self.strategies)
        self.levels = tuple(self.levels)
        if self.bins_2d is not None:
            self.bins_2d = tuple(self.bins_2d)
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if self.max_workers < 1:
            raise ValueError("max_workers must be >= 1")
        if self.target_seconds <= 0:
            raise ValueError("target_seconds must be positive")
        if self.bins_1d is not None and self.bins_1d < 1:
            raise ValueError("bins_1d must be >= 1")
        if self.bins_2d is not None and (len(self.bins_2d) != 2 or min(self.bins_2d) < 1):
            raise ValueError("bins_2d must be two counts >= 1")
        if not self.levels or min(self.levels) < 1:
            raise ValueError("levels must be non-empty counts >= 1")
        if self.entropy_base <= 1:
            raise ValueError("entropy_base must be > 1")

    def bins_1d_for(self, n: int) -> int:
        return self.bins_1d if self.bins_1d is not None else min(DEFAULT_BINS_1D, n)

    def bins_2d_for(self, n_rows: int, n_cols: int) -> tuple[int, int]:
        if self.bins_2d is not None:
            return self.bins_2d
        return min(DEFAULT_BINS_2D, n_rows), min(DEFAULT_BINS_2D, n_cols)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["strategies"] = [s.value for s in self.strategies]
        doc["matrix_paths"] = list(self.matrix_paths)
        doc["levels"] = list(self.levels)
        doc["bins_2d"] = list(self.bins_2d) if self.bins_2d is not None else None
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        doc = json.loads(text)
        if doc.get("strategies"):
            doc["strategies"] = tuple(StrategyKind(s) for s in doc["strategies"])
        else:
            doc.pop("strategies", None)
        for key in ("matrix_paths", "levels"):
            if key in doc:
                doc[key] = tuple(doc[key])
        if doc.get("bins_2d") is not None:
            doc["bins_2d"] = tuple(doc["bins_2d"])
        return cls(**doc)
