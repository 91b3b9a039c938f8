"""Sparse-matrix randomization workbench: entropy analytics and SpMV benchmarking."""

from .bench import (
    BenchRecord,
    ExperimentResult,
    KernelSpec,
    MetricSummary,
    PermutedOperands,
    TrialResult,
    aggregate_trials,
    best_mark,
    choose_iterations,
    default_kernels,
    gflops,
    run_experiment,
    time_kernel,
)
from .config import RunConfig
from .entropy import (
    BinnedHistogram,
    EntropySummary,
    col_histogram,
    hierarchical_entropy,
    histogram_2d,
    histogram_to_csv,
    hierarchical_to_csv,
    js_divergence,
    row_histogram,
    shannon_entropy,
)
from .kernels import (
    RowPartition,
    make_row_partition,
    relative_error,
    spmv_coo,
    spmv_csr,
    spmv_csr_parallel,
)
from .matio import (
    CooMatrix,
    CsrMatrix,
    MatrixMarketError,
    coo_to_csr,
    csr_to_coo,
    load_matrix_market,
    parse_matrix_market,
    write_matrix_market,
)
from .permute import (
    TABLE_ORDER,
    Permutation,
    StrategyKind,
    build_strategy,
    compose,
    gradient_pivot,
    identity_permutation,
    inverse,
    permute_cols,
    permute_matrix,
    permute_rows,
    permute_vector,
    random_permutation,
    read_permutation,
    riffle_shuffle_permutation,
    write_permutation,
)

__version__ = "0.1.0"
