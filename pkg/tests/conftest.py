"""Shared generators and independent oracles for the test suite."""

import numpy as np
import pytest
from hypothesis import strategies as st

from spmv_entropy import CooMatrix


def make_random_coo(rng, n_rows, n_cols, density):
    """Random CooMatrix with `density` fill and values in [-1, 1), shuffled entry order."""
    total = n_rows * n_cols
    nnz = int(round(density * total))
    cells = rng.choice(total, size=nnz, replace=False)
    values = rng.random(nnz) * 2.0 - 1.0
    return CooMatrix(n_rows, n_cols, cells // n_cols, cells % n_cols, values)


def dense_spmv_oracle(m, x):
    """Brute-force y = A @ x through an explicit dense double loop."""
    dense = [[0.0] * m.n_cols for _ in range(m.n_rows)]
    for i, j, v in zip(m.row_idx, m.col_idx, m.values):
        dense[i][j] = v
    y = [0.0] * m.n_rows
    for i in range(m.n_rows):
        acc = 0.0
        for j in range(m.n_cols):
            acc += dense[i][j] * x[j]
        y[i] = acc
    return np.asarray(y)


def recount_rows_oracle(m):
    """Per-row nonzero counts via a plain dict walk."""
    counts = {}
    for i in m.row_idx:
        counts[int(i)] = counts.get(int(i), 0) + 1
    return counts


def recount_cols_oracle(m):
    counts = {}
    for j in m.col_idx:
        counts[int(j)] = counts.get(int(j), 0) + 1
    return counts


def triplet_multiset(m):
    return sorted(zip(m.row_idx.tolist(), m.col_idx.tolist(), m.values.tolist()))


@st.composite
def coo_matrices(draw, max_dim=8, min_dim=1):
    """Small random CooMatrix instances for property tests."""
    n_rows = draw(st.integers(min_dim, max_dim))
    n_cols = draw(st.integers(min_dim, max_dim))
    cells = draw(st.sets(st.integers(0, n_rows * n_cols - 1), max_size=n_rows * n_cols))
    cells = sorted(cells)
    values = draw(
        st.lists(
            st.floats(allow_nan=False, allow_infinity=False, width=64),
            min_size=len(cells),
            max_size=len(cells),
        )
    )
    rows = [c // n_cols for c in cells]
    cols = [c % n_cols for c in cells]
    return CooMatrix(n_rows, n_cols, rows, cols, values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
