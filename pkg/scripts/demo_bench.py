#!/usr/bin/env python3
"""End-to-end demo: generate a random sparse matrix, benchmark every strategy.

Writes a Matrix Market file, runs the full repeat-and-summarize protocol on
it with desk-scale settings, and leaves the raw trial log, JSON summary, and
text tables in the output directory.
"""

import argparse
from pathlib import Path

import numpy as np

from spmv_entropy import CooMatrix, write_matrix_market
from spmv_entropy.cli import main as cli_main


def random_matrix(n, density, seed):
    rng = np.random.default_rng(seed)
    nnz = int(density * n * n)
    cells = rng.choice(n * n, size=nnz, replace=False)
    values = rng.random(nnz) * 2 - 1
    return CooMatrix(n, n, cells // n, cells % n, values)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256, help="matrix dimension")
    ap.add_argument("--density", type=float, default=0.02, help="nonzero density")
    ap.add_argument("--repeats", type=int, default=8, help="experiment repeats")
    ap.add_argument("--max-workers", type=int, default=4, help="largest worker count")
    ap.add_argument("--target-seconds", type=float, default=0.05, help="loop duration target")
    ap.add_argument("--out", default="demo_out", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="master seed")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mtx = out / f"random_{args.n}.mtx"
    write_matrix_market(random_matrix(args.n, args.density, args.seed), mtx)
    print(f"wrote {mtx}")

    code = cli_main(
        [
            "bench",
            str(mtx),
            "--out",
            str(out),
            "--repeats",
            str(args.repeats),
            "--max-workers",
            str(args.max_workers),
            "--target-seconds",
            str(args.target_seconds),
            "--seed",
            str(args.seed),
        ]
    )
    print(f"outputs in {out}/ (trials.jsonl, summary.json, tables.txt)")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
