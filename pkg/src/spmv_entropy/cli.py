"""Command-line pipeline: analyze, permute, bench, report, matrices."""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__, report
from .bench import default_kernels, run_experiment
from .config import RunConfig
from .entropy import (
    col_histogram,
    hierarchical_entropy,
    hierarchical_to_csv,
    histogram_2d,
    histogram_to_csv,
    js_divergence,
    row_histogram,
    shannon_entropy,
)
from .matio import MatrixMarketError, load_matrix_market, write_matrix_market
from .permute import (
    StrategyKind,
    build_strategy,
    identity_permutation,
    permute_matrix,
    read_permutation,
    write_permutation,
)

STRATEGY_BY_CODE = {kind.code: kind for kind in StrategyKind}

# SuiteSparse collection names this workbench was tuned around; users download
# the .mtx files themselves (no network access here).
BENCHMARK_MATRICES = (
    "mult_dcop_01",
    "mult_dcop_02",
    "mult_dcop_03",
    "lp_fit2d",
    "bloweya",
    "lp_osa_07",
    "ex19",
    "brainpc2",
    "shermanACb",
    "cvxqp3",
    "case9",
    "TSOPF_FS_b9_c6",
    "OPF_6000",
    "OPF_3754",
    "c-47",
    "mhd4800a",
    "gen4",
    "Maragal_6",
    "aft01",
    "TSOPF_RS_b39_c7",
)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _json_dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _host_meta() -> dict:
    cpu = platform.processor()
    try:
        with open("/proc/cpuinfo", "r", encoding="utf-8") as f:
            for line in f:
                if line.lower().startswith("model name"):
                    cpu = line.split(":", 1)[1].strip()
                    break
    except OSError:
        pass
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu": cpu,
        "cores": os.cpu_count(),
    }


def _entropy_triple(m, config: RunConfig) -> dict:
    if m.nnz == 0:
        return {"row": None, "col": None, "grid_2d": None}
    base = config.entropy_base
    br, bc = config.bins_2d_for(m.n_rows, m.n_cols)
    return {
        "row": shannon_entropy(row_histogram(m, config.bins_1d_for(m.n_rows)), base),
        "col": shannon_entropy(col_histogram(m, config.bins_1d_for(m.n_cols)), base),
        "grid_2d": shannon_entropy(histogram_2d(m, br, bc), base),
    }


def cmd_analyze(config: RunConfig) -> int:
    """Write histogram CSVs, hierarchical entropy grids, scalar entropies, and
    per-strategy before/after comparisons for every matrix."""
    out = Path(config.output_dir)
    failures = 0
    for path in config.matrix_paths:
        try:
            m = load_matrix_market(path)
        except (OSError, MatrixMarketError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        stem = Path(path).stem
        b1_r = config.bins_1d_for(m.n_rows)
        b1_c = config.bins_1d_for(m.n_cols)
        br, bc = config.bins_2d_for(m.n_rows, m.n_cols)
        row_h = row_histogram(m, b1_r)
        col_h = col_histogram(m, b1_c)
        grid_h = histogram_2d(m, br, bc)
        _write_text(out / f"{stem}.row_hist.csv", histogram_to_csv(row_h))
        _write_text(out / f"{stem}.col_hist.csv", histogram_to_csv(col_h))
        _write_text(out / f"{stem}.hist2d.csv", histogram_to_csv(grid_h))
        summary = hierarchical_entropy(m, config.levels, (br, bc), config.entropy_base)
        _write_text(out / f"{stem}.hier.csv", hierarchical_to_csv(summary))
        doc = {
            "matrix": stem,
            "n_rows": m.n_rows,
            "n_cols": m.n_cols,
            "nnz": m.nnz,
            "bins_1d": {"rows": b1_r, "cols": b1_c},
            "bins_2d": [br, bc],
            "levels": list(summary.levels),
            "entropy_base": config.entropy_base,
            "entropy": _entropy_triple(m, config),
        }
        _write_text(out / f"{stem}.entropy.json", _json_dumps(doc))
        if m.nnz:
            for kind in config.strategies:
                try:
                    p_r, p_c = build_strategy(
                        m,
                        kind,
                        config.master_seed,
                        config.bins_1d_for(max(m.n_rows, m.n_cols)),
                        column_gradient_both_axes=config.column_gradient_both_axes,
                    )
                except ValueError as exc:
                    print(f"error: {path} [{kind.value}]: {exc}", file=sys.stderr)
                    failures += 1
                    continue
                permuted = permute_matrix(m, p_r, p_c)
                compare = {
                    "matrix": stem,
                    "strategy": kind.value,
                    "seed": config.master_seed,
                    "entropy_before": _entropy_triple(m, config),
                    "entropy_after": _entropy_triple(permuted, config),
                    "jsd_bits": {
                        "row": js_divergence(row_h, row_histogram(permuted, b1_r)),
                        "col": js_divergence(col_h, col_histogram(permuted, b1_c)),
                        "grid_2d": js_divergence(grid_h, histogram_2d(permuted, br, bc)),
                    },
                }
                _write_text(out / f"{stem}.{kind.code}.compare.json", _json_dumps(compare))
        print(f"analyzed {path} -> {out}")
    return 1 if failures else 0


def cmd_permute(
    config: RunConfig,
    kind: StrategyKind | None,
    seed: int | None = None,
    rows_perm: str | None = None,
    cols_perm: str | None = None,
) -> int:
    """Write the permuted matrix, both permutation files, and an entropy sidecar.

    Instead of building a strategy, existing permutation files can be applied
    via `rows_perm`/`cols_perm` (the missing axis stays identity).
    """
    out = Path(config.output_dir)
    seed = config.master_seed if seed is None else seed
    failures = 0
    for path in config.matrix_paths:
        try:
            m = load_matrix_market(path)
        except (OSError, MatrixMarketError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        stem = Path(path).stem
        try:
            if rows_perm or cols_perm:
                label = "applied"
                p_r = read_permutation(rows_perm) if rows_perm else identity_permutation(m.n_rows)
                p_c = read_permutation(cols_perm) if cols_perm else identity_permutation(m.n_cols)
            else:
                label = kind.value
                p_r, p_c = build_strategy(
                    m,
                    kind,
                    seed,
                    config.bins_1d_for(max(m.n_rows, m.n_cols)),
                    column_gradient_both_axes=config.column_gradient_both_axes,
                )
            permuted = permute_matrix(m, p_r, p_c)
        except ValueError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        code = "applied" if label == "applied" else kind.code
        out.mkdir(parents=True, exist_ok=True)
        write_matrix_market(permuted, out / f"{stem}.{code}.mtx")
        write_permutation(p_r, out / f"{stem}.{code}.rows.perm")
        write_permutation(p_c, out / f"{stem}.{code}.cols.perm")
        sidecar = {
            "matrix": stem,
            "strategy": label,
            "seed": seed,
            "nnz": m.nnz,
            "entropy_before": _entropy_triple(m, config),
            "entropy_after": _entropy_triple(permuted, config),
        }
        _write_text(out / f"{stem}.{code}.permute.json", _json_dumps(sidecar))
        print(f"permuted {path} [{label}] -> {out}")
    return 1 if failures else 0


def _write_summary_outputs(trials, out: Path) -> None:
    records = report.summarize(trials)
    _write_text(out / "summary.json", report.render_summary_json(records))
    _write_text(out / "tables.txt", report.render_table(records))


def cmd_bench(config: RunConfig, resummarize: str | None = None) -> int:
    """Run the measurement protocol and write trials.jsonl, summary.json,
    tables.txt, config.json, and meta.json; or re-summarize an existing log."""
    out = Path(config.output_dir)
    if resummarize is not None:
        return cmd_report(resummarize, out_dir=str(out))
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    trials = []
    failed_matrices: dict[str, str] = {}
    for path in config.matrix_paths:
        try:
            m = load_matrix_market(path)
        except (OSError, MatrixMarketError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failed_matrices[str(path)] = str(exc)
            continue
        kernels = default_kernels(config.max_workers, m.n_rows, config.reuse_pool)
        for kind in config.strategies:
            try:
                result = run_experiment(
                    m,
                    kind,
                    kernels,
                    repeats=config.repeats,
                    master_seed=config.master_seed,
                    config=config,
                    matrix_name=Path(path).name,
                )
            except ValueError as exc:
                print(f"error: {path} [{kind.value}]: {exc}", file=sys.stderr)
                failed_matrices[f"{path} [{kind.value}]"] = str(exc)
                continue
            trials.extend(result.trials)
            print(f"benchmarked {Path(path).name} [{kind.value}] repeats={config.repeats}")
    correctness_failures = sum(1 for t in trials if not t.correctness_ok)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "config.json", config.to_json())
    meta = {
        "tool": "spmv-entropy",
        "version": __version__,
        "started": started,
        "host": _host_meta(),
        "failed_matrices": failed_matrices,
        "correctness_failures": correctness_failures,
    }
    _write_text(out / "meta.json", _json_dumps(meta))
    if trials:
        report.write_trials(trials, out / "trials.jsonl")
        _write_summary_outputs(trials, out)
        print((out / "tables.txt").read_text(encoding="utf-8"), end="")
    return 1 if (failed_matrices or correctness_failures) else 0


def cmd_report(log_path: str, out_dir: str | None = None) -> int:
    """Rebuild summary.json and tables.txt from a raw trial log, without timing."""
    try:
        trials = report.read_trials(log_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {log_path}: {exc}", file=sys.stderr)
        return 1
    if not trials:
        print(f"error: {log_path}: no trials", file=sys.stderr)
        return 1
    out = Path(out_dir) if out_dir is not None else Path(log_path).resolve().parent
    _write_summary_outputs(trials, out)
    print((out / "tables.txt").read_text(encoding="utf-8"), end="")
    return 1 if any(not t.correctness_ok for t in trials) else 0


def cmd_matrices() -> int:
    for name in BENCHMARK_MATRICES:
        print(name)
    return 0


def _parse_bins_2d(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected RxC, e.g. 128x128")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError("expected RxC, e.g. 128x128") from None


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated grid sizes, e.g. 2,4,8") from None


def _parse_strategies(text: str) -> tuple[StrategyKind, ...]:
    kinds = []
    for code in (c.strip() for c in text.split(",") if c.strip()):
        if code not in STRATEGY_BY_CODE:
            raise argparse.ArgumentTypeError(
                f"unknown strategy {code!r} (choose from {','.join(STRATEGY_BY_CODE)})"
            )
        kinds.append(STRATEGY_BY_CODE[code])
    if not kinds:
        raise argparse.ArgumentTypeError("at least one strategy required")
    return tuple(kinds)


def _parse_base(text: str) -> float:
    return 2.0 if text == "2" else math.e


def _add_common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="start from a config echo JSON; explicit flags override")
    p.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    p.add_argument("--seed", type=int, metavar="N", help="master seed (default: 0)")
    p.add_argument("--bins-1d", type=int, metavar="N", help="1-D histogram bins (default: min(512, dim))")
    p.add_argument("--bins-2d", type=_parse_bins_2d, metavar="RxC", help="2-D grid (default: 128x128 clamped)")
    p.add_argument("--levels", type=_parse_levels, metavar="LIST", help="hierarchical grid sizes (default: 2,4,8)")
    p.add_argument("--strategies", type=_parse_strategies, metavar="CODES", help="subset of reg,r,rc,gr,gc")
    p.add_argument("--entropy-base", choices=("2", "e"), help="entropy log base (default: 2)")
    p.add_argument("--gc-columns-only", action="store_true", default=None,
                   help="columns-only gradient strategy instead of both axes")


def _build_config(args: argparse.Namespace, paths: list[str]) -> RunConfig:
    base = RunConfig()
    if getattr(args, "config", None):
        base = RunConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    updates: dict = {}
    if paths:
        updates["matrix_paths"] = tuple(paths)
    mapping = {
        "out": "output_dir",
        "seed": "master_seed",
        "bins_1d": "bins_1d",
        "bins_2d": "bins_2d",
        "levels": "levels",
        "strategies": "strategies",
        "repeats": "repeats",
        "target_seconds": "target_seconds",
        "max_workers": "max_workers",
    }
    for arg_name, field_name in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            updates[field_name] = value
    if getattr(args, "entropy_base", None) is not None:
        updates["entropy_base"] = _parse_base(args.entropy_base)
    if getattr(args, "gc_columns_only", None):
        updates["column_gradient_both_axes"] = False
    if getattr(args, "spawn_pool_per_call", None):
        updates["reuse_pool"] = False
    return replace(base, **updates)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spmv-entropy",
        description="Analyze, permute, and benchmark sparse matrices for SpMV "
        "under entropy-raising row/column randomization.",
    )
    parser.add_argument("--version", action="version", version=f"spmv-entropy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="histograms, entropy, hierarchical grids, strategy comparisons")
    p.add_argument("matrices", nargs="*", metavar="MTX", help="Matrix Market files")
    _add_common_options(p)

    p = sub.add_parser("permute", help="write a permuted matrix and its permutation files")
    p.add_argument("matrices", nargs="*", metavar="MTX")
    p.add_argument("--strategy", choices=sorted(STRATEGY_BY_CODE), help="strategy code")
    p.add_argument("--apply-rows", metavar="PERM", help="apply this row permutation file instead of a strategy")
    p.add_argument("--apply-cols", metavar="PERM", help="apply this column permutation file instead of a strategy")
    _add_common_options(p)

    p = sub.add_parser("bench", help="run the repeat-and-summarize benchmark protocol")
    p.add_argument("matrices", nargs="*", metavar="MTX")
    p.add_argument("--repeats", type=int, metavar="N", help="experiment repeats (default: 32)")
    p.add_argument("--target-seconds", type=float, metavar="S", help="target loop duration (default: 2.0)")
    p.add_argument("--max-workers", type=int, metavar="P", help="largest parallel worker count (default: 16)")
    p.add_argument("--resummarize", metavar="LOG", help="skip timing; rebuild summary from a trial log")
    p.add_argument("--spawn-pool-per-call", action="store_true", default=None,
                   help="spawn a fresh worker pool per parallel call instead of reusing one")
    _add_common_options(p)

    p = sub.add_parser("report", help="rebuild summary and tables from a raw trial log")
    p.add_argument("log", metavar="LOG", help="trials.jsonl from a bench run")
    p.add_argument("--out", metavar="DIR", help="output directory (default: next to LOG)")

    sub.add_parser("matrices", help="list the SuiteSparse matrices this workbench targets")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "matrices":
        return cmd_matrices()
    if args.command == "report":
        return cmd_report(args.log, out_dir=args.out)
    config = _build_config(args, list(getattr(args, "matrices", []) or []))
    if args.command == "analyze":
        if not config.matrix_paths:
            build_parser().error("analyze requires at least one matrix file")
        return cmd_analyze(config)
    if args.command == "permute":
        if not config.matrix_paths:
            build_parser().error("permute requires at least one matrix file")
        if args.strategy is None and not (args.apply_rows or args.apply_cols):
            build_parser().error("permute requires --strategy or --apply-rows/--apply-cols")
        kind = STRATEGY_BY_CODE[args.strategy] if args.strategy else None
        return cmd_permute(config, kind, seed=args.seed, rows_perm=args.apply_rows, cols_perm=args.apply_cols)
    if args.command == "bench":
        if args.resummarize is None and not config.matrix_paths:
            build_parser().error("bench requires matrix files or --resummarize LOG")
        return cmd_bench(config, resummarize=args.resummarize)
    raise AssertionError(f"unhandled command {args.command!r}")


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
