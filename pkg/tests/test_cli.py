import json

import numpy as np
import pytest

from conftest import make_random_coo
from spmv_entropy import (
    CooMatrix,
    coo_to_csr,
    inverse,
    load_matrix_market,
    permute_vector,
    read_permutation,
    relative_error,
    spmv_csr,
    write_matrix_market,
)
from spmv_entropy.cli import BENCHMARK_MATRICES, main


def write_identity(path, n=4):
    m = CooMatrix(n, n, np.arange(n), np.arange(n), np.ones(n))
    write_matrix_market(m, path)
    return m


def write_random(path, rng, n=8, density=0.4):
    m = make_random_coo(rng, n, n, density)
    write_matrix_market(m, path)
    return m


def test_analyze_row_histogram_csv(tmp_path):
    mtx = tmp_path / "ident.mtx"
    write_identity(mtx)
    out = tmp_path / "out"
    assert main(["analyze", str(mtx), "--out", str(out), "--bins-1d", "2", "--levels", "2"]) == 0
    assert (out / "ident.row_hist.csv").read_text() == "0,2\n1,2\n"
    assert (out / "ident.col_hist.csv").read_text() == "0,2\n1,2\n"
    doc = json.loads((out / "ident.entropy.json").read_text())
    assert doc["nnz"] == 4
    assert doc["entropy"]["row"] == 1.0


def test_analyze_regular_compare_jsd_zero(tmp_path):
    mtx = tmp_path / "ident.mtx"
    write_identity(mtx)
    out = tmp_path / "out"
    assert main(["analyze", str(mtx), "--out", str(out), "--strategies", "reg"]) == 0
    doc = json.loads((out / "ident.reg.compare.json").read_text())
    assert doc["jsd_bits"] == {"row": 0.0, "col": 0.0, "grid_2d": 0.0}
    assert doc["entropy_before"] == doc["entropy_after"]


def test_analyze_parse_failure_nonzero_exit(tmp_path, capsys):
    good = tmp_path / "good.mtx"
    write_identity(good)
    bad = tmp_path / "bad.mtx"
    bad.write_text("not a matrix\n")
    out = tmp_path / "out"
    assert main(["analyze", str(bad), str(good), "--out", str(out)]) == 1
    # the good matrix is still analyzed
    assert (out / "good.entropy.json").exists()
    assert "bad.mtx" in capsys.readouterr().err


def test_analyze_clustered_matrix_entropy_rises(tmp_path):
    # dense 8x8 block in a 64x64 matrix; random row+column permutation spreads it
    rows, cols = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
    m = CooMatrix(64, 64, rows.ravel(), cols.ravel(), np.ones(64))
    mtx = tmp_path / "block.mtx"
    write_matrix_market(m, mtx)
    out = tmp_path / "out"
    assert main(["analyze", str(mtx), "--out", str(out), "--strategies", "rc", "--bins-2d", "8x8"]) == 0
    doc = json.loads((out / "block.rc.compare.json").read_text())
    assert doc["entropy_after"]["grid_2d"] > doc["entropy_before"]["grid_2d"]
    assert doc["jsd_bits"]["grid_2d"] > 0


def test_permute_regular_roundtrips(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    original = write_random(mtx, rng)
    out = tmp_path / "out"
    assert main(["permute", str(mtx), "--strategy", "reg", "--out", str(out)]) == 0
    assert load_matrix_market(out / "m.reg.mtx") == original


def test_permute_same_seed_is_byte_identical(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    for out in (out1, out2):
        assert main(["permute", str(mtx), "--strategy", "rc", "--seed", "9", "--out", str(out)]) == 0
    for name in ("m.rc.mtx", "m.rc.rows.perm", "m.rc.cols.perm", "m.rc.permute.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_permute_outputs_reproduce_roundtrip_identity(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    original = write_random(mtx, rng, n=12)
    out = tmp_path / "out"
    assert main(["permute", str(mtx), "--strategy", "gc", "--seed", "3", "--out", str(out)]) == 0
    permuted = load_matrix_market(out / "m.gc.mtx")
    p_r = read_permutation(out / "m.gc.rows.perm")
    p_c = read_permutation(out / "m.gc.cols.perm")
    x = rng.random(original.n_cols)
    reference = spmv_csr(coo_to_csr(original), x)
    y_perm = spmv_csr(coo_to_csr(permuted), permute_vector(x, p_c))
    assert relative_error(permute_vector(y_perm, inverse(p_r)), reference) <= 1e-12


def bench_args(mtx, out, repeats="2", extra_matrices=()):
    return (
        ["bench", str(mtx)]
        + [str(p) for p in extra_matrices]
        + ["--out", str(out), "--repeats", repeats, "--max-workers", "2", "--target-seconds", "0.002"]
    )


def test_bench_smoke(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng)
    out = tmp_path / "out"
    assert main(bench_args(mtx, out)) == 0
    for name in ("trials.jsonl", "summary.json", "tables.txt", "config.json", "meta.json"):
        assert (out / name).exists()
    doc = json.loads((out / "summary.json").read_text())
    rows = doc["m.mtx"]
    assert set(rows) == {"regular", "row_permute", "row_column_permute", "row_gradient", "column_gradient"}
    for strategy_rows in rows.values():
        for entry in strategy_rows.values():
            assert entry["min"] <= entry["mean"] <= entry["max"]
    reg_h = rows["regular"]["H"]
    assert reg_h["min"] == reg_h["max"] == reg_h["mean"]


def test_bench_parse_failure_continues_and_fails(tmp_path, rng, capsys):
    good = tmp_path / "good.mtx"
    write_random(good, rng)
    bad = tmp_path / "bad.mtx"
    bad.write_text("junk\n")
    out = tmp_path / "out"
    code = main(bench_args(good, out, extra_matrices=[bad]) + ["--strategies", "reg"])
    assert code == 1
    assert (out / "summary.json").exists()
    meta = json.loads((out / "meta.json").read_text())
    assert str(bad) in meta["failed_matrices"]


def test_report_resummarize_byte_identical(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng)
    out = tmp_path / "out"
    assert main(bench_args(mtx, out) + ["--strategies", "reg,r"]) == 0
    redone = tmp_path / "redone"
    assert main(["report", str(out / "trials.jsonl"), "--out", str(redone)]) == 0
    assert (redone / "summary.json").read_bytes() == (out / "summary.json").read_bytes()
    assert (redone / "tables.txt").read_bytes() == (out / "tables.txt").read_bytes()


def test_bench_resummarize_flag(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng)
    out = tmp_path / "out"
    assert main(bench_args(mtx, out) + ["--strategies", "reg"]) == 0
    redone = tmp_path / "redone"
    assert main(["bench", "--resummarize", str(out / "trials.jsonl"), "--out", str(redone)]) == 0
    assert (redone / "summary.json").read_bytes() == (out / "summary.json").read_bytes()


def test_report_empty_log_errors(tmp_path, capsys):
    log = tmp_path / "empty.jsonl"
    log.write_text("")
    assert main(["report", str(log)]) == 1
    assert "no trials" in capsys.readouterr().err


def test_report_malformed_line_errors(tmp_path, capsys):
    log = tmp_path / "bad.jsonl"
    log.write_text("{}\n")
    assert main(["report", str(log)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_matrices_lists_collection(capsys):
    assert main(["matrices"]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed == list(BENCHMARK_MATRICES)
    assert "OPF_3754" in printed


def test_config_echo_reproduces_analyze_outputs(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng)
    out1 = tmp_path / "o1"
    assert (
        main(
            [
                "bench",
                str(mtx),
                "--out",
                str(out1),
                "--repeats",
                "2",
                "--max-workers",
                "2",
                "--target-seconds",
                "0.002",
                "--strategies",
                "reg,rc",
                "--seed",
                "17",
            ]
        )
        == 0
    )
    echo = out1 / "config.json"
    out2 = tmp_path / "o2"
    assert main(["analyze", "--config", str(echo), "--out", str(out2)]) == 0
    out3 = tmp_path / "o3"
    assert main(["analyze", str(mtx), "--out", str(out3), "--strategies", "reg,rc", "--seed", "17"]) == 0
    for name in ("m.entropy.json", "m.reg.compare.json", "m.rc.compare.json"):
        assert (out2 / name).read_bytes() == (out3 / name).read_bytes()


def test_invalid_strategy_code_usage_error(tmp_path):
    with pytest.raises(SystemExit):
        main(["bench", "x.mtx", "--strategies", "bogus"])


def test_permute_apply_existing_permutation_files(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng, n=10)
    out = tmp_path / "out"
    assert main(["permute", str(mtx), "--strategy", "rc", "--seed", "5", "--out", str(out)]) == 0
    redone = tmp_path / "redone"
    assert (
        main(
            [
                "permute",
                str(mtx),
                "--apply-rows",
                str(out / "m.rc.rows.perm"),
                "--apply-cols",
                str(out / "m.rc.cols.perm"),
                "--out",
                str(redone),
            ]
        )
        == 0
    )
    assert load_matrix_market(redone / "m.applied.mtx") == load_matrix_market(out / "m.rc.mtx")


def test_permute_apply_size_mismatch_fails(tmp_path, rng, capsys):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng, n=10)
    perm = tmp_path / "wrong.perm"
    perm.write_text("3\n0\n1\n2\n")
    assert main(["permute", str(mtx), "--apply-rows", str(perm), "--out", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_gc_columns_only_switch(tmp_path, rng):
    mtx = tmp_path / "m.mtx"
    write_random(mtx, rng, n=12)
    out = tmp_path / "out"
    assert main(["permute", str(mtx), "--strategy", "gc", "--seed", "3", "--out", str(out), "--gc-columns-only"]) == 0
    p_r = read_permutation(out / "m.gc.rows.perm")
    assert p_r.forward.tolist() == list(range(12))
