import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_spmv_oracle, make_random_coo
from spmv_entropy import (
    CooMatrix,
    coo_to_csr,
    make_row_partition,
    relative_error,
    spmv_coo,
    spmv_csr,
    spmv_csr_parallel,
)


def identity_coo(n):
    return CooMatrix(n, n, np.arange(n), np.arange(n), np.ones(n))


def test_spmv_csr_identity():
    y = spmv_csr(coo_to_csr(identity_coo(3)), np.array([4.0, 5.0, 6.0]))
    assert y.tolist() == [4.0, 5.0, 6.0]


def test_spmv_csr_hand_case():
    m = CooMatrix(2, 2, [0, 0, 1], [0, 1, 1], [1.0, 2.0, 3.0])
    y = spmv_csr(coo_to_csr(m), np.array([1.0, 1.0]))
    assert y.tolist() == [3.0, 3.0]


def test_spmv_csr_matches_dense_oracle(rng):
    m = make_random_coo(rng, 8, 8, 0.5)
    x = rng.random(8)
    assert relative_error(spmv_csr(coo_to_csr(m), x), dense_spmv_oracle(m, x)) <= 1e-14


def test_spmv_coo_identity():
    y = spmv_coo(identity_coo(3), np.array([4.0, 5.0, 6.0]))
    assert y.tolist() == [4.0, 5.0, 6.0]


def test_spmv_coo_shuffled_order_matches_csr(rng):
    m = make_random_coo(rng, 12, 9, 0.4)
    order = rng.permutation(m.nnz)
    shuffled = CooMatrix(12, 9, m.row_idx[order], m.col_idx[order], m.values[order])
    x = rng.random(9)
    assert relative_error(spmv_coo(shuffled, x), spmv_csr(coo_to_csr(m), x)) <= 1e-14


def test_spmv_coo_empty_matrix():
    m = CooMatrix(3, 2, [], [], [])
    assert spmv_coo(m, np.array([1.0, 2.0])).tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("workers", [1, 4])
def test_parallel_bitwise_equals_serial(rng, workers):
    m = make_random_coo(rng, 100, 100, 0.05)
    csr = coo_to_csr(m)
    x = rng.random(100)
    serial = spmv_csr(csr, x)
    assert np.array_equal(spmv_csr_parallel(csr, x, workers), serial)


def test_parallel_one_row_per_worker(rng):
    m = make_random_coo(rng, 16, 16, 0.3)
    csr = coo_to_csr(m)
    x = rng.random(16)
    assert np.array_equal(spmv_csr_parallel(csr, x, 16), spmv_csr(csr, x))


def test_parallel_spawned_pool_matches_reused(rng):
    m = make_random_coo(rng, 32, 32, 0.2)
    csr = coo_to_csr(m)
    x = rng.random(32)
    a = spmv_csr_parallel(csr, x, 4, reuse_pool=True)
    b = spmv_csr_parallel(csr, x, 4, reuse_pool=False)
    assert np.array_equal(a, b)


def test_dimension_mismatch_raises(rng):
    m = make_random_coo(rng, 4, 5, 0.5)
    with pytest.raises(ValueError):
        spmv_coo(m, np.zeros(4))
    with pytest.raises(ValueError):
        spmv_csr(coo_to_csr(m), np.zeros(6))
    with pytest.raises(ValueError):
        spmv_csr_parallel(coo_to_csr(m), np.zeros(5), 0)


def test_make_row_partition_examples():
    assert make_row_partition(10, 2).boundaries.tolist() == [0, 5, 10]
    assert make_row_partition(10, 3).boundaries.tolist() == [0, 4, 7, 10]
    assert make_row_partition(5, 5).boundaries.tolist() == [0, 1, 2, 3, 4, 5]


def test_make_row_partition_errors():
    with pytest.raises(ValueError):
        make_row_partition(10, 0)
    with pytest.raises(ValueError):
        make_row_partition(3, 4)


@given(st.integers(1, 200), st.data())
@settings(max_examples=80)
def test_partition_sizes_differ_by_at_most_one(n_rows, data):
    workers = data.draw(st.integers(1, n_rows))
    part = make_row_partition(n_rows, workers)
    sizes = np.diff(part.boundaries)
    assert part.boundaries[0] == 0 and part.boundaries[-1] == n_rows
    assert sizes.max() - sizes.min() <= 1
    assert sizes.sum() == n_rows


def test_linearity(rng):
    m = make_random_coo(rng, 20, 15, 0.3)
    csr = coo_to_csr(m)
    x1, x2 = rng.random(15), rng.random(15)
    a = 3.25
    combined = spmv_csr(csr, a * x1 + x2)
    separate = a * spmv_csr(csr, x1) + spmv_csr(csr, x2)
    assert relative_error(combined, separate) <= 1e-12


def test_relative_error_zero_reference():
    assert relative_error(np.array([0.0, 0.0]), np.array([0.0, 0.0])) == 0.0
    assert relative_error(np.array([1e-3, 0.0]), np.array([0.0, 0.0])) == 1e-3
