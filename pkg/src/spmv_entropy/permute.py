"""Row/column permutation strategies: random, gradient-pivot riffle, and pairs.

The five strategies pair a row permutation with a column permutation:
identity baseline, random rows, random rows+columns, gradient-pivot riffle on
rows, and gradient-pivot riffle on both axes. The riffle splits an index range
at the point of steepest increase in the binned nonzero histogram, randomly
permutes each part locally, then interleaves the parts like two halves of a
card deck.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .entropy import BinnedHistogram, DEFAULT_BINS_1D, col_histogram, row_histogram
from .matio import CooMatrix


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection on [0, n): forward[i] is the new position of index i."""

    forward: np.ndarray

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64)
        object.__setattr__(self, "forward", fwd)
        if fwd.ndim != 1 or fwd.size == 0:
            raise ValueError("forward must be a non-empty 1-D array")
        counts = np.bincount(fwd, minlength=fwd.size) if fwd.min() >= 0 and fwd.max() < fwd.size else None
        if counts is None or np.any(counts != 1):
            raise ValueError("forward is not a bijection on [0, n)")

    @property
    def n(self) -> int:
        return int(self.forward.size)

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.forward] = np.arange(self.n, dtype=np.int64)
        return Permutation(inv)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.forward, other.forward)


def identity_permutation(n: int) -> Permutation:
    if n < 1:
        raise ValueError("permutation size must be >= 1")
    return Permutation(np.arange(n, dtype=np.int64))


def inverse(p: Permutation) -> Permutation:
    """The permutation q with p.forward[q.forward[i]] = i for all i."""
    return p.inverse()


def compose(after: Permutation, first: Permutation) -> Permutation:
    """Permutation equivalent to applying `first`, then `after`."""
    if after.n != first.n:
        raise ValueError("size mismatch")
    return Permutation(after.forward[first.forward])


def random_permutation(n: int, seed: int) -> Permutation:
    """Uniform permutation from a seeded PCG64 generator (Fisher-Yates shuffle).

    The same (n, seed) yields the same permutation on every platform.
    """
    if n < 1:
        raise ValueError("permutation size must be >= 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    return Permutation(rng.permutation(n).astype(np.int64))


def permute_rows(m: CooMatrix, p: Permutation) -> CooMatrix:
    """Move entry (i, j, v) to (p.forward[i], j, v)."""
    if p.n != m.n_rows:
        raise ValueError("permutation size must equal n_rows")
    return CooMatrix(m.n_rows, m.n_cols, p.forward[m.row_idx], m.col_idx.copy(), m.values.copy())


def permute_cols(m: CooMatrix, p: Permutation) -> CooMatrix:
    """Move entry (i, j, v) to (i, p.forward[j], v)."""
    if p.n != m.n_cols:
        raise ValueError("permutation size must equal n_cols")
    return CooMatrix(m.n_rows, m.n_cols, m.row_idx.copy(), p.forward[m.col_idx], m.values.copy())


def permute_matrix(m: CooMatrix, p_r: Permutation, p_c: Permutation) -> CooMatrix:
    """Apply a (row, column) permutation pair in one pass."""
    if p_r.n != m.n_rows or p_c.n != m.n_cols:
        raise ValueError("permutation sizes must match matrix dimensions")
    return CooMatrix(m.n_rows, m.n_cols, p_r.forward[m.row_idx], p_c.forward[m.col_idx], m.values.copy())


def permute_vector(x: np.ndarray, p: Permutation) -> np.ndarray:
    """Return `out` with out[p.forward[i]] = x[i]."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise ValueError("vector length must equal permutation size")
    out = np.empty_like(x)
    out[p.forward] = x
    return out


def gradient_pivot(h: BinnedHistogram) -> int:
    """Index (in row/column space) of the steepest histogram increase.

    Returns the start offset of bin argmax_i(h[i+1] - h[i]) + 1; ties break
    toward the smallest bin index.
    """
    if h.counts.ndim != 1:
        raise ValueError("gradient pivot requires a 1-D histogram")
    if h.counts.size < 2:
        raise ValueError("gradient pivot requires at least 2 bins")
    grad = h.counts[1:] - h.counts[:-1]
    return int(h.edges[0][int(np.argmax(grad)) + 1])


def _interleave_forward(n: int, pivot: int) -> np.ndarray:
    # alternate one index from [0, pivot) and one from [pivot, n) until the
    # shorter part runs out, then append the remainder of the longer part
    a, b = pivot, n - pivot
    short = min(a, b)
    fwd = np.empty(n, dtype=np.int64)
    ka = np.arange(a, dtype=np.int64)
    kb = np.arange(b, dtype=np.int64)
    fwd[:a] = np.where(ka < short, 2 * ka, ka + b)
    fwd[a:] = np.where(kb < short, 2 * kb + 1, kb + a)
    return fwd


def riffle_shuffle_permutation(n: int, pivot: int, seed: int) -> Permutation:
    """Riffle the ranges [0, pivot) and [pivot, n) into one permutation.

    Each part is first permuted randomly on its own (seeded), then the two
    parts are interleaved deterministically. Same (n, pivot, seed) always
    yields the same permutation.
    """
    if not 0 < pivot < n:
        raise ValueError(f"pivot {pivot} out of range (0, {n})")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    local = np.empty(n, dtype=np.int64)
    local[:pivot] = rng.permutation(pivot)
    local[pivot:] = pivot + rng.permutation(n - pivot)
    return compose(Permutation(_interleave_forward(n, pivot)), Permutation(local))


class StrategyKind(Enum):
    """The identity baseline plus the four randomization formats."""

    REGULAR = "regular"
    ROW_PERMUTE = "row_permute"
    ROW_COLUMN_PERMUTE = "row_column_permute"
    ROW_GRADIENT = "row_gradient"
    COLUMN_GRADIENT = "column_gradient"

    @property
    def code(self) -> str:
        return _CODES[self]

    @property
    def label(self) -> str:
        return _LABELS[self]


_CODES = {
    StrategyKind.REGULAR: "reg",
    StrategyKind.ROW_PERMUTE: "r",
    StrategyKind.ROW_COLUMN_PERMUTE: "rc",
    StrategyKind.ROW_GRADIENT: "gr",
    StrategyKind.COLUMN_GRADIENT: "gc",
}

_LABELS = {
    StrategyKind.REGULAR: "Regular",
    StrategyKind.ROW_PERMUTE: "Row-Permute",
    StrategyKind.ROW_GRADIENT: "Row-Gradient",
    StrategyKind.COLUMN_GRADIENT: "Column-Gradient",
    StrategyKind.ROW_COLUMN_PERMUTE: "Row-Column-Permute",
}

# fixed presentation and tie-breaking order for reports
TABLE_ORDER = (
    StrategyKind.REGULAR,
    StrategyKind.ROW_PERMUTE,
    StrategyKind.ROW_GRADIENT,
    StrategyKind.COLUMN_GRADIENT,
    StrategyKind.ROW_COLUMN_PERMUTE,
)

_ROW_STREAM, _COL_STREAM = 0, 1


def _axis_seed(seed: int, axis: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(axis,)).generate_state(1, np.uint64)[0])


def build_strategy(
    m: CooMatrix,
    kind: StrategyKind,
    seed: int,
    bins: int = DEFAULT_BINS_1D,
    column_gradient_both_axes: bool = True,
) -> tuple[Permutation, Permutation]:
    """Construct the (row, column) permutation pair for a strategy.

    `bins` is the 1-D histogram resolution feeding the gradient pivot; it is
    clamped per axis to the matrix dimension. COLUMN_GRADIENT applies the
    gradient riffle to both axes by default; set
    `column_gradient_both_axes=False` for the columns-only variant.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    row_seed = _axis_seed(seed, _ROW_STREAM)
    col_seed = _axis_seed(seed, _COL_STREAM)
    ident_r = identity_permutation(m.n_rows)
    ident_c = identity_permutation(m.n_cols)
    if kind is StrategyKind.REGULAR:
        return ident_r, ident_c
    if kind is StrategyKind.ROW_PERMUTE:
        return random_permutation(m.n_rows, row_seed), ident_c
    if kind is StrategyKind.ROW_COLUMN_PERMUTE:
        return random_permutation(m.n_rows, row_seed), random_permutation(m.n_cols, col_seed)

    def riffled(n: int, histogram: BinnedHistogram, axis_seed: int) -> Permutation:
        pivot = gradient_pivot(histogram)
        return riffle_shuffle_permutation(n, pivot, axis_seed)

    if kind is StrategyKind.ROW_GRADIENT:
        p_r = riffled(m.n_rows, row_histogram(m, min(bins, m.n_rows)), row_seed)
        return p_r, ident_c
    if kind is StrategyKind.COLUMN_GRADIENT:
        p_c = riffled(m.n_cols, col_histogram(m, min(bins, m.n_cols)), col_seed)
        if not column_gradient_both_axes:
            return ident_r, p_c
        p_r = riffled(m.n_rows, row_histogram(m, min(bins, m.n_rows)), row_seed)
        return p_r, p_c
    raise ValueError(f"unknown strategy {kind!r}")


def write_permutation(p: Permutation, path: str | os.PathLike) -> None:
    """Serialize: first line n, then one 0-based image index per line."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{p.n}\n")
        for v in p.forward:
            f.write(f"{v}\n")


def read_permutation(path: str | os.PathLike) -> Permutation:
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise ValueError("empty permutation file")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} indices, found {len(lines) - 1}")
    return Permutation(np.asarray([int(v) for v in lines[1:]], dtype=np.int64))
