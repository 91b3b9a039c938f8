"""Raw trial logs, summary documents, and the fixed-width results table."""

from __future__ import annotations

import json
import os
from typing import IO, Iterable

from .bench import ENTROPY_KEY, BenchRecord, TrialResult, aggregate_trials, best_mark, _strategy_rank
from .permute import StrategyKind

KERNEL_LABELS = {"cpu_coo": "CPU COO", "cpu_csr": "CPU CSR", "cpu_par": "CPU PAR"}
_CANONICAL_KERNEL_ORDER = ("cpu_coo", "cpu_csr", "cpu_par")

_TRIAL_FIELDS = (
    "matrix",
    "strategy",
    "kernel",
    "workers",
    "repeat",
    "seed",
    "iterations",
    "seconds_per_call",
    "gflops",
    "entropy_bits",
    "correctness_ok",
)


def trial_to_json(t: TrialResult) -> str:
    doc = {
        "matrix": t.matrix,
        "strategy": t.strategy.value,
        "kernel": t.kernel_id,
        "workers": t.workers,
        "repeat": t.repeat,
        "seed": t.seed,
        "iterations": t.iterations,
        "seconds_per_call": t.seconds_per_call,
        "gflops": t.gflops,
        "entropy_bits": t.entropy_bits,
        "correctness_ok": t.correctness_ok,
    }
    return json.dumps(doc, sort_keys=True)


def write_trials(trials: Iterable[TrialResult], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in trials:
            f.write(trial_to_json(t) + "\n")


def _trial_from_doc(doc: dict) -> TrialResult:
    missing = [k for k in _TRIAL_FIELDS if k not in doc]
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    return TrialResult(
        matrix=doc["matrix"],
        strategy=StrategyKind(doc["strategy"]),
        kernel_id=doc["kernel"],
        workers=doc["workers"],
        repeat=int(doc["repeat"]),
        seed=int(doc["seed"]),
        iterations=int(doc["iterations"]),
        seconds_per_call=float(doc["seconds_per_call"]),
        gflops=float(doc["gflops"]),
        entropy_bits=float(doc["entropy_bits"]),
        correctness_ok=bool(doc["correctness_ok"]),
    )


def read_trials(source: str | os.PathLike | IO[str]) -> list[TrialResult]:
    """Parse a JSON Lines trial log; malformed lines report their line number."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    trials = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            trials.append(_trial_from_doc(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
    return trials


def summarize(trials: list[TrialResult]) -> list[BenchRecord]:
    """Aggregate and best-mark; the one summarization path for bench and report."""
    return best_mark(aggregate_trials(trials))


def _row_keys(rec: BenchRecord) -> list[str]:
    keys = [k for k in _CANONICAL_KERNEL_ORDER if k in rec.kernels]
    keys += sorted(k for k in rec.kernels if k not in _CANONICAL_KERNEL_ORDER)
    return keys


def summary_document(records: list[BenchRecord]) -> dict:
    """Nested dict: matrix -> strategy -> kernel -> {min, max, mean, best}."""
    doc: dict = {}
    for rec in records:
        strategies = doc.setdefault(rec.matrix, {})
        rows = {}
        for key in _row_keys(rec):
            s = rec.kernels[key]
            entry = {"min": s.min, "max": s.max, "mean": s.mean, "best": s.best}
            if s.workers is not None:
                entry["workers"] = s.workers
            rows[key] = entry
        e = rec.entropy
        rows[ENTROPY_KEY] = {"min": e.min, "max": e.max, "mean": e.mean, "best": e.best}
        strategies[rec.strategy.value] = rows
    return doc


def render_summary_json(records: list[BenchRecord]) -> str:
    return json.dumps(summary_document(records), indent=2, sort_keys=True) + "\n"


def render_table(records: list[BenchRecord]) -> str:
    """Fixed-width table: per matrix, per strategy, one min/max/mean row per
    kernel plus an H row; three decimals, `*` after `max` on the best row."""
    lines = []
    for matrix in dict.fromkeys(rec.matrix for rec in records):
        lines.append(matrix)
        recs = sorted((r for r in records if r.matrix == matrix), key=lambda r: _strategy_rank(r.strategy))
        for rec in recs:
            lines.append(f" {rec.strategy.label}")
            for key in _row_keys(rec):
                lines.append(_metric_line(KERNEL_LABELS.get(key, key), rec.kernels[key]))
            lines.append(_metric_line(ENTROPY_KEY, rec.entropy))
    return "\n".join(lines) + "\n"


def _metric_line(label: str, s) -> str:
    star = "*" if s.best else " "
    return f"{'':26}{label:<11}min {s.min:6.3f} max{star}{s.max:6.3f} mean {s.mean:6.3f}"
