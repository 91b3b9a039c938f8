"""Measurement protocol: repeated, seeded experiments over permutation strategies.

One experiment = one (matrix, strategy) pair. Each of the `repeats` rounds
draws a fresh permutation pair from the master seed, verifies the permuted
SpMV against the unpermuted reference, then times every kernel for an
iteration count picked by a short pilot and clamped to [1000, 5000]. The
first (cold) call is included in the timing. Rates are reported as GFLOPS =
2 * nnz / seconds_per_call / 1e9, and each metric is summarized as
min/max/mean over the repeats, failed trials counting as zero.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .config import RunConfig
from .entropy import histogram_2d, shannon_entropy
from .kernels import relative_error, spmv_coo, spmv_csr, spmv_csr_parallel
from .matio import CooMatrix, CsrMatrix, coo_to_csr
from .permute import (
    TABLE_ORDER,
    StrategyKind,
    build_strategy,
    permute_matrix,
    permute_vector,
)

ITERATIONS_MIN = 1000
ITERATIONS_MAX = 5000
CORRECTNESS_RTOL = 1e-12
PILOT_CALLS = 10

_X_STREAM = 0
_REPEAT_STREAM = 1


@dataclass(frozen=True)
class PermutedOperands:
    """The permuted matrix in both storage formats, ready for the kernels."""

    coo: CooMatrix
    csr: CsrMatrix


@dataclass(frozen=True)
class KernelSpec:
    """A timeable kernel: id, optional worker count, and fn(operands, x) -> y."""

    kernel_id: str
    fn: Callable[[PermutedOperands, np.ndarray], np.ndarray]
    workers: int | None = None


def default_kernels(max_workers: int, n_rows: int, reuse_pool: bool = True) -> list[KernelSpec]:
    """COO, CSR, and one parallel-CSR spec per worker count up to the row count."""
    specs = [
        KernelSpec("cpu_coo", lambda ops, x: spmv_coo(ops.coo, x)),
        KernelSpec("cpu_csr", lambda ops, x: spmv_csr(ops.csr, x)),
    ]
    for p in range(1, min(max_workers, n_rows) + 1):
        specs.append(
            KernelSpec(
                "cpu_par",
                lambda ops, x, p=p: spmv_csr_parallel(ops.csr, x, p, reuse_pool=reuse_pool),
                workers=p,
            )
        )
    return specs


@dataclass(frozen=True)
class TrialResult:
    """One timed kernel run within one repeat of an experiment."""

    matrix: str
    strategy: StrategyKind
    kernel_id: str
    workers: int | None
    repeat: int
    seed: int
    iterations: int
    seconds_per_call: float
    gflops: float
    entropy_bits: float
    correctness_ok: bool

    def __post_init__(self):
        if not ITERATIONS_MIN <= self.iterations <= ITERATIONS_MAX:
            raise ValueError(f"iterations must lie in [{ITERATIONS_MIN}, {ITERATIONS_MAX}]")
        if self.gflops < 0 or self.seconds_per_call < 0:
            raise ValueError("rates and durations must be non-negative")


@dataclass(frozen=True)
class MetricSummary:
    min: float
    max: float
    mean: float
    best: bool = False
    workers: int | None = None

    def __post_init__(self):
        if not self.min <= self.mean <= self.max:
            raise ValueError("summary must satisfy min <= mean <= max")


@dataclass(frozen=True)
class BenchRecord:
    """Per-(matrix, strategy) summary: one MetricSummary per kernel plus entropy."""

    matrix: str
    strategy: StrategyKind
    kernels: dict[str, MetricSummary]
    entropy: MetricSummary


@dataclass(frozen=True)
class ExperimentResult:
    record: BenchRecord
    trials: list[TrialResult]

    @property
    def correctness_failures(self) -> int:
        return sum(1 for t in self.trials if not t.correctness_ok)


def choose_iterations(estimated_seconds_per_call: float, target_total: float = 2.0) -> int:
    """Iterations so the loop lasts about `target_total`, clamped to [1000, 5000]."""
    if estimated_seconds_per_call <= 0:
        raise ValueError("estimated seconds per call must be positive")
    return int(min(ITERATIONS_MAX, max(ITERATIONS_MIN, round(target_total / estimated_seconds_per_call))))


def gflops(nnz: int, seconds_per_call: float) -> float:
    """2 * nnz floating-point operations per call, in units of 1e9 per second."""
    if seconds_per_call <= 0:
        raise ValueError("seconds per call must be positive")
    if nnz == 0:
        return 0.0
    return 2 * nnz / seconds_per_call / 1e9


def time_kernel(kernel: Callable, m, x: np.ndarray, iterations: int) -> tuple[float, np.ndarray]:
    """Mean wall-clock seconds per call over `iterations` calls, plus the last output.

    The first (cold) call is included; there is no warm-up discard.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    t0 = time.perf_counter()
    for _ in range(iterations):
        y = kernel(m, x)
    elapsed = time.perf_counter() - t0
    return elapsed / iterations, y


def derived_seed(master_seed: int, repeat: int) -> int:
    """Per-repeat strategy seed; stable across runs and platforms."""
    return int(
        np.random.SeedSequence(master_seed, spawn_key=(_REPEAT_STREAM, repeat)).generate_state(1, np.uint64)[0]
    )


def input_vector(master_seed: int, n: int) -> np.ndarray:
    """Deterministic pseudo-random x in [0, 1), fixed for a whole experiment."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(_X_STREAM,))
    return np.random.Generator(np.random.PCG64(seq)).random(n)


def run_experiment(
    m: CooMatrix,
    strategy: StrategyKind,
    kernels: list[KernelSpec],
    repeats: int = 32,
    master_seed: int = 0,
    config: RunConfig | None = None,
    matrix_name: str = "matrix",
) -> ExperimentResult:
    """Run the full repeat-and-summarize protocol for one (matrix, strategy).

    Per repeat: build the strategy's permutation pair from a derived seed,
    permute matrix and input, verify the round trip against the unpermuted
    reference (relative 1e-12), compute the 2-D binned entropy, then time
    each kernel. A repeat whose verification fails produces zero-rate trials
    for every kernel instead of timings; a kernel that raises or returns a
    wrong result scores zero for that repeat. Entropy statistics are
    unaffected by kernel failures.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if not kernels:
        raise ValueError("at least one kernel is required")
    config = config if config is not None else RunConfig()
    x = input_vector(master_seed, m.n_cols)
    y_ref = spmv_csr(coo_to_csr(m), x)
    bins_r, bins_c = config.bins_2d_for(m.n_rows, m.n_cols)
    iterations: dict[tuple[str, int | None], int] = {}
    trials: list[TrialResult] = []
    for r in range(repeats):
        seed_r = derived_seed(master_seed, r)
        p_r, p_c = build_strategy(
            m, strategy, seed_r, config.bins_1d_for(max(m.n_rows, m.n_cols)),
            column_gradient_both_axes=config.column_gradient_both_axes,
        )
        permuted = permute_matrix(m, p_r, p_c)
        operands = PermutedOperands(permuted, coo_to_csr(permuted))
        x_perm = permute_vector(x, p_c)
        y_expected = permute_vector(y_ref, p_r)
        entropy_bits = (
            shannon_entropy(histogram_2d(permuted, bins_r, bins_c), base=config.entropy_base)
            if permuted.nnz
            else 0.0
        )
        repeat_ok = relative_error(spmv_csr(operands.csr, x_perm), y_expected) <= CORRECTNESS_RTOL
        for spec in kernels:
            key = (spec.kernel_id, spec.workers)
            ok = repeat_ok
            seconds = 0.0
            if ok:
                try:
                    if key not in iterations:
                        pilot, _ = time_kernel(spec.fn, operands, x_perm, PILOT_CALLS)
                        iterations[key] = choose_iterations(max(pilot, 1e-9), config.target_seconds)
                    seconds, y_last = time_kernel(spec.fn, operands, x_perm, iterations[key])
                    ok = seconds > 0 and relative_error(y_last, y_expected) <= CORRECTNESS_RTOL
                except Exception:
                    ok = False
            if key not in iterations:
                iterations[key] = ITERATIONS_MIN
            rate = gflops(permuted.nnz, seconds) if ok else 0.0
            trials.append(
                TrialResult(
                    matrix=matrix_name,
                    strategy=strategy,
                    kernel_id=spec.kernel_id,
                    workers=spec.workers,
                    repeat=r,
                    seed=seed_r,
                    iterations=iterations[key],
                    seconds_per_call=seconds if ok else 0.0,
                    gflops=rate,
                    entropy_bits=entropy_bits,
                    correctness_ok=ok,
                )
            )
    record = aggregate_trials(trials)[0]
    return ExperimentResult(record, trials)


def _summary(values: list[float], workers: int | None = None) -> MetricSummary:
    arr = np.asarray(values)
    lo, hi = float(arr.min()), float(arr.max())
    # the exact mean lies in [lo, hi]; clamp away sub-ulp rounding overshoot
    mean = min(max(float(arr.mean()), lo), hi)
    return MetricSummary(lo, hi, mean, workers=workers)


def aggregate_trials(trials: list[TrialResult]) -> list[BenchRecord]:
    """Collapse trials into one BenchRecord per (matrix, strategy), in trial order.

    The parallel kernel is reported at its best worker count only (largest
    max rate; ties go to fewer workers); every worker count stays in the raw
    trials. Entropy is aggregated once per repeat.
    """
    if not trials:
        raise ValueError("no trials")
    groups: dict[tuple[str, StrategyKind], list[TrialResult]] = {}
    for t in trials:
        groups.setdefault((t.matrix, t.strategy), []).append(t)
    records = []
    for (matrix, strategy), group in groups.items():
        kernels: dict[str, MetricSummary] = {}
        for kernel_id in dict.fromkeys(t.kernel_id for t in group):
            mine = [t for t in group if t.kernel_id == kernel_id]
            by_workers: dict[int | None, list[float]] = {}
            for t in mine:
                by_workers.setdefault(t.workers, []).append(t.gflops)
            candidates = [
                _summary(rates, workers=w)
                for w, rates in sorted(by_workers.items(), key=lambda kv: (kv[0] is not None, kv[0]))
            ]
            kernels[kernel_id] = max(candidates, key=lambda s: s.max)
        by_repeat: dict[int, float] = {}
        for t in group:
            by_repeat.setdefault(t.repeat, t.entropy_bits)
        entropy = _summary([by_repeat[r] for r in sorted(by_repeat)])
        records.append(BenchRecord(matrix=matrix, strategy=strategy, kernels=kernels, entropy=entropy))
    return records


ENTROPY_KEY = "H"


def _strategy_rank(kind: StrategyKind) -> int:
    return TABLE_ORDER.index(kind)


def best_mark(records: list[BenchRecord]) -> list[BenchRecord]:
    """Flag, per matrix and per metric row, the strategy with the largest max.

    Applies to every kernel and to the entropy row. Ties go to the strategy
    appearing first in the fixed table order.
    """
    if not records:
        raise ValueError("no records")
    by_matrix: dict[str, list[BenchRecord]] = {}
    for rec in records:
        by_matrix.setdefault(rec.matrix, []).append(rec)
    winners: set[tuple[str, StrategyKind, str]] = set()
    for matrix, recs in by_matrix.items():
        ordered = sorted(recs, key=lambda r: _strategy_rank(r.strategy))
        keys = {ENTROPY_KEY}
        for rec in recs:
            keys.update(rec.kernels)
        for key in keys:
            best_rec, best_val = None, None
            for rec in ordered:
                summary = rec.entropy if key == ENTROPY_KEY else rec.kernels.get(key)
                if summary is None:
                    continue
                if best_val is None or summary.max > best_val:
                    best_rec, best_val = rec, summary.max
            if best_rec is not None:
                winners.add((matrix, best_rec.strategy, key))
    marked = []
    for rec in records:
        kernels = {
            key: replace(s, best=(rec.matrix, rec.strategy, key) in winners) for key, s in rec.kernels.items()
        }
        entropy = replace(rec.entropy, best=(rec.matrix, rec.strategy, ENTROPY_KEY) in winners)
        marked.append(replace(rec, kernels=kernels, entropy=entropy))
    return marked
