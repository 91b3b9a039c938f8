#!/usr/bin/env python3
"""Entropy gain of each randomization strategy on a synthetic clustered matrix.

Builds a matrix with one dense block plus a sparse background, applies every
strategy over a batch of seeds, and prints mean 2-D binned entropy before and
after together with the Jensen-Shannon divergence to the original layout.
"""

import argparse

import numpy as np

from spmv_entropy import (
    CooMatrix,
    StrategyKind,
    TABLE_ORDER,
    build_strategy,
    histogram_2d,
    js_divergence,
    permute_matrix,
    shannon_entropy,
)


def clustered_matrix(n, block, background, seed):
    rng = np.random.default_rng(seed)
    lo = (n - block) // 2
    br, bc = np.meshgrid(np.arange(block), np.arange(block), indexing="ij")
    rows = (lo + br.ravel()).astype(np.int64)
    cols = (lo + bc.ravel()).astype(np.int64)
    cells = rng.choice(n * n, size=background * 2, replace=False)
    extra_rows = cells // n
    extra_cols = cells % n
    outside = ~(
        (extra_rows >= lo) & (extra_rows < lo + block) & (extra_cols >= lo) & (extra_cols < lo + block)
    )
    rows = np.concatenate((rows, extra_rows[outside][:background]))
    cols = np.concatenate((cols, extra_cols[outside][:background]))
    return CooMatrix(n, n, rows, cols, np.ones(rows.size))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000, help="matrix dimension")
    ap.add_argument("--block", type=int, default=200, help="dense block size")
    ap.add_argument("--background", type=int, default=2000, help="background nonzeros")
    ap.add_argument("--seeds", type=int, default=32, help="permutations per strategy")
    ap.add_argument("--bins", type=int, default=128, help="2-D histogram resolution")
    args = ap.parse_args()

    m = clustered_matrix(args.n, args.block, args.background, seed=0)
    bins = (min(args.bins, m.n_rows), min(args.bins, m.n_cols))
    base_hist = histogram_2d(m, *bins)
    base_entropy = shannon_entropy(base_hist)
    print(f"matrix {m.n_rows}x{m.n_cols}, nnz {m.nnz}, bins {bins[0]}x{bins[1]}")
    print(f"unpermuted entropy: {base_entropy:.3f} bits")
    print()
    print(f"{'strategy':<22}{'mean H':>9}{'min H':>9}{'max H':>9}{'gain':>8}{'JSD':>8}")
    for kind in TABLE_ORDER:
        entropies = []
        jsd = []
        for seed in range(args.seeds):
            p_r, p_c = build_strategy(m, kind, seed)
            permuted = permute_matrix(m, p_r, p_c)
            hist = histogram_2d(permuted, *bins)
            entropies.append(shannon_entropy(hist))
            jsd.append(js_divergence(base_hist, hist))
        mean = float(np.mean(entropies))
        print(
            f"{kind.label:<22}{mean:>9.3f}{min(entropies):>9.3f}{max(entropies):>9.3f}"
            f"{mean - base_entropy:>8.3f}{float(np.mean(jsd)):>8.3f}"
        )


if __name__ == "__main__":
    main()
