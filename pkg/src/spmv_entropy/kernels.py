"""SpMV kernels: serial COO, serial CSR, and fork-join row-partitioned CSR.

All kernels are pure and deterministic: matrix and input vector are read-only,
and a given (matrix, x) always produces the same output bits. The parallel
kernel assigns each worker a disjoint output row range, so it is bitwise
identical to the serial CSR kernel for every worker count.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .matio import CooMatrix, CsrMatrix


@dataclass(frozen=True, eq=False)
class RowPartition:
    """Even split of [0, n_rows) into `workers` contiguous ranges.

    boundaries[k] .. boundaries[k+1] is worker k's row range; range sizes
    differ by at most one row.
    """

    boundaries: np.ndarray
    workers: int

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64)
        object.__setattr__(self, "boundaries", b)
        if b.size != self.workers + 1 or b[0] != 0 or np.any(np.diff(b) < 0):
            raise ValueError("boundaries must be a non-decreasing array of workers + 1 offsets starting at 0")


def make_row_partition(n_rows: int, workers: int) -> RowPartition:
    """Split rows evenly: the first n_rows % workers parts get one extra row."""
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    if workers > n_rows:
        raise ValueError(f"worker count {workers} exceeds row count {n_rows}")
    base, extra = divmod(n_rows, workers)
    sizes = np.full(workers, base, dtype=np.int64)
    sizes[:extra] += 1
    boundaries = np.zeros(workers + 1, dtype=np.int64)
    np.cumsum(sizes, out=boundaries[1:])
    return RowPartition(boundaries, workers)


def _check_input(x: np.ndarray, n_cols: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n_cols,):
        raise ValueError(f"input vector length {x.shape} does not match n_cols {n_cols}")
    return x


def _accumulate_rows(m: CsrMatrix, x: np.ndarray, lo: int, hi: int, out: np.ndarray) -> None:
    # per-row sums over the stored (column-ascending) slice; the reduction is
    # a fixed deterministic association, independent of buffer offsets
    p0, p1 = int(m.row_ptr[lo]), int(m.row_ptr[hi])
    seg = np.zeros(hi - lo)
    if p1 > p0:
        prods = m.values[p0:p1] * x[m.col_idx[p0:p1]]
        starts = m.row_ptr[lo:hi] - p0
        ends = m.row_ptr[lo + 1 : hi + 1] - p0
        nonempty = ends > starts
        seg[nonempty] = np.add.reduceat(prods, starts[nonempty])
    out[lo:hi] = seg


def spmv_csr(m: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """y[i] = sum over row i's slice of values[k] * x[col_idx[k]]."""
    x = _check_input(x, m.n_cols)
    out = np.empty(m.n_rows)
    _accumulate_rows(m, x, 0, m.n_rows, out)
    return out


def spmv_coo(m: CooMatrix, x: np.ndarray) -> np.ndarray:
    """y starts at zero; y[row_idx[k]] += values[k] * x[col_idx[k]] in stored entry order."""
    x = _check_input(x, m.n_cols)
    out = np.zeros(m.n_rows)
    np.add.at(out, m.row_idx, m.values * x[m.col_idx])
    return out


_pool_lock = threading.Lock()
_pools: dict[int, ThreadPoolExecutor] = {}


def _shared_pool(workers: int) -> ThreadPoolExecutor:
    with _pool_lock:
        pool = _pools.get(workers)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix=f"spmv-w{workers}")
            _pools[workers] = pool
        return pool


def spmv_csr_parallel(m: CsrMatrix, x: np.ndarray, workers: int, reuse_pool: bool = True) -> np.ndarray:
    """Fork-join CSR SpMV over an even row partition; bitwise equal to spmv_csr.

    Each worker computes and writes only its own output rows, so no
    accumulation order changes and no synchronization beyond the final join
    is needed. With `reuse_pool` a per-worker-count thread pool is kept
    alive between calls; otherwise a fresh pool is spawned per call, which
    exposes the pool start-up overhead in timings.
    """
    x = _check_input(x, m.n_cols)
    part = make_row_partition(m.n_rows, workers)
    out = np.empty(m.n_rows)

    def run(pool: ThreadPoolExecutor) -> None:
        futures = [
            pool.submit(_accumulate_rows, m, x, int(lo), int(hi), out)
            for lo, hi in zip(part.boundaries[:-1], part.boundaries[1:])
        ]
        for f in futures:
            f.result()

    if reuse_pool:
        run(_shared_pool(workers))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            run(pool)
    return out


def relative_error(got: np.ndarray, expected: np.ndarray) -> float:
    """Max absolute difference scaled by the max magnitude of `expected`.

    Falls back to the absolute difference when `expected` is all zeros.
    """
    got = np.asarray(got, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    if got.shape != expected.shape:
        raise ValueError("shape mismatch")
    diff = float(np.max(np.abs(got - expected))) if got.size else 0.0
    scale = float(np.max(np.abs(expected))) if expected.size else 0.0
    return diff / scale if scale > 0 else diff
