"""Binned nonzero histograms and entropy analytics for sparsity uniformity.

A matrix is summarized by counting its nonzeros over equal-width index bins,
in one dimension (rows or columns) or on a 2-D grid. The Shannon entropy of
the resulting count distribution measures how uniformly the nonzeros spread:
log2(B) bits for a perfectly even spread over B bins, 0 for full concentration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matio import CooMatrix

DEFAULT_BINS_1D = 512
DEFAULT_BINS_2D = 128
DEFAULT_LEVELS = (2, 4, 8)


@dataclass(frozen=True, eq=False)
class BinnedHistogram:
    """Nonzero counts over equal-width bins; 1-D (counts[B]) or 2-D (counts[Br, Bc]).

    `edges` holds one offset array per axis: edges[d][b] is the first index of
    bin b and edges[d][-1] equals the axis length. When the dimension is not
    divisible by the bin count, the last bin absorbs the remainder.
    """

    counts: np.ndarray
    edges: tuple[np.ndarray, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "edges", tuple(np.asarray(e, dtype=np.int64) for e in self.edges))
        if counts.ndim not in (1, 2):
            raise ValueError("counts must be 1-D or 2-D")
        if len(self.edges) != counts.ndim:
            raise ValueError("one edge array required per counts axis")
        for axis, e in enumerate(self.edges):
            if e.size != counts.shape[axis] + 1:
                raise ValueError("edges must have bin-count + 1 offsets")
        if counts.size and counts.min() < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)


def _bin_edges(n: int, bins: int) -> np.ndarray:
    width = n // bins
    edges = np.arange(bins + 1, dtype=np.int64) * width
    edges[-1] = n
    return edges


def _bin_index(idx: np.ndarray, n: int, bins: int) -> np.ndarray:
    width = n // bins
    return np.minimum(idx // width, bins - 1)


def _check_bins(bins: int, n: int, what: str) -> None:
    if bins < 1:
        raise ValueError(f"{what} bin count must be >= 1")
    if bins > n:
        raise ValueError(f"{what} bin count {bins} exceeds dimension {n}")


def row_histogram(m: CooMatrix, bins: int) -> BinnedHistogram:
    """Count nonzeros per row bin (equal-width bins over [0, n_rows))."""
    _check_bins(bins, m.n_rows, "row")
    counts = np.bincount(_bin_index(m.row_idx, m.n_rows, bins), minlength=bins)
    return BinnedHistogram(counts, (_bin_edges(m.n_rows, bins),))


def col_histogram(m: CooMatrix, bins: int) -> BinnedHistogram:
    """Count nonzeros per column bin."""
    _check_bins(bins, m.n_cols, "column")
    counts = np.bincount(_bin_index(m.col_idx, m.n_cols, bins), minlength=bins)
    return BinnedHistogram(counts, (_bin_edges(m.n_cols, bins),))


def _counts_2d(rows, cols, n_rows, n_cols, bins_r, bins_c) -> np.ndarray:
    flat = _bin_index(rows, n_rows, bins_r) * bins_c + _bin_index(cols, n_cols, bins_c)
    return np.bincount(flat, minlength=bins_r * bins_c).reshape(bins_r, bins_c)


def histogram_2d(m: CooMatrix, bins_r: int, bins_c: int) -> BinnedHistogram:
    """Count nonzeros on a bins_r x bins_c grid over the whole matrix."""
    _check_bins(bins_r, m.n_rows, "row")
    _check_bins(bins_c, m.n_cols, "column")
    counts = _counts_2d(m.row_idx, m.col_idx, m.n_rows, m.n_cols, bins_r, bins_c)
    return BinnedHistogram(counts, (_bin_edges(m.n_rows, bins_r), _bin_edges(m.n_cols, bins_c)))


def _entropy_of_counts(counts: np.ndarray, base: float) -> float:
    total = counts.sum()
    p = counts[counts > 0] / total
    if base == 2.0:
        return float(-(p * np.log2(p)).sum())
    return float(-(p * np.log(p)).sum() / math.log(base))


def shannon_entropy(h: BinnedHistogram, base: float = 2.0) -> float:
    """Entropy of the bin-count distribution: -sum p_i log(p_i), p_i = count_i / total.

    Zero-count bins contribute nothing (0 log 0 := 0). Base 2 yields bits.
    """
    if h.total == 0:
        raise ValueError("histogram is empty (total = 0)")
    return _entropy_of_counts(h.counts.ravel(), base)


@dataclass(frozen=True, eq=False)
class EntropySummary:
    """Whole-matrix 2-D entropy plus per-cell entropies on square grids.

    `levels` maps a grid size L to an L x L array; cell (a, b) holds the
    entropy of the 2-D sub-histogram of nonzeros falling in that cell, or 0
    when the cell is empty.
    """

    h_bits: float
    b_total: int
    levels: dict[int, np.ndarray] = field(default_factory=dict)
    base: float = 2.0


def hierarchical_entropy(
    m: CooMatrix,
    levels: tuple[int, ...] = DEFAULT_LEVELS,
    cell_bins: tuple[int, int] = (DEFAULT_BINS_2D, DEFAULT_BINS_2D),
    base: float = 2.0,
) -> EntropySummary:
    """Per-cell entropy grids at each requested square grid size.

    Each cell is re-binned at `cell_bins` resolution clamped to the cell
    dimensions, so a 1x1 level reproduces the whole-matrix entropy. Levels
    larger than min(n_rows, n_cols) are dropped.
    """
    if not levels:
        raise ValueError("levels must be non-empty")
    cb_r, cb_c = cell_bins
    top_r, top_c = min(cb_r, m.n_rows), min(cb_c, m.n_cols)
    headline = shannon_entropy(histogram_2d(m, top_r, top_c), base) if m.nnz else 0.0
    grids: dict[int, np.ndarray] = {}
    for level in levels:
        if level < 1 or level > min(m.n_rows, m.n_cols):
            continue
        row_edges = _bin_edges(m.n_rows, level)
        col_edges = _bin_edges(m.n_cols, level)
        rbin = _bin_index(m.row_idx, m.n_rows, level)
        cbin = _bin_index(m.col_idx, m.n_cols, level)
        grid = np.zeros((level, level))
        for a in range(level):
            for b in range(level):
                mask = (rbin == a) & (cbin == b)
                if not mask.any():
                    continue
                height = int(row_edges[a + 1] - row_edges[a])
                width = int(col_edges[b + 1] - col_edges[b])
                counts = _counts_2d(
                    m.row_idx[mask] - row_edges[a],
                    m.col_idx[mask] - col_edges[b],
                    height,
                    width,
                    min(cb_r, height),
                    min(cb_c, width),
                )
                grid[a, b] = _entropy_of_counts(counts.ravel(), base)
        grids[level] = grid
    return EntropySummary(h_bits=headline, b_total=top_r * top_c, levels=grids, base=base)


def js_divergence(p: BinnedHistogram, q: BinnedHistogram) -> float:
    """Jensen-Shannon divergence between two bin-count distributions, in bits.

    JSD(p, q) = H(m) - (H(p) + H(q)) / 2 with m the average distribution;
    symmetric and bounded to [0, 1].
    """
    if p.counts.shape != q.counts.shape:
        raise ValueError("histograms must have identical bin layout")
    if p.total == 0 or q.total == 0:
        raise ValueError("histogram is empty (total = 0)")
    pp = p.counts.ravel() / p.total
    qq = q.counts.ravel() / q.total
    mm = 0.5 * (pp + qq)

    def h(dist: np.ndarray) -> float:
        nz = dist[dist > 0]
        return float(-(nz * np.log2(nz)).sum())

    return max(h(mm) - 0.5 * (h(pp) + h(qq)), 0.0)


def histogram_to_csv(h: BinnedHistogram) -> str:
    """CSV rows `bin,count` (1-D) or `row_bin,col_bin,count` (2-D, row-major)."""
    lines = []
    if h.counts.ndim == 1:
        for b, c in enumerate(h.counts):
            lines.append(f"{b},{c}")
    else:
        for a in range(h.counts.shape[0]):
            for b in range(h.counts.shape[1]):
                lines.append(f"{a},{b},{h.counts[a, b]}")
    return "\n".join(lines) + "\n"


def hierarchical_to_csv(summary: EntropySummary) -> str:
    """CSV rows `level,row,col,entropy` over every grid cell of every level."""
    lines = []
    for level in sorted(summary.levels):
        grid = summary.levels[level]
        for a in range(level):
            for b in range(level):
                lines.append(f"{level},{a},{b},{float(grid[a, b])!r}")
    return "\n".join(lines) + "\n"
