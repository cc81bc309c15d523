"""End-to-end CLI flows, exit codes, and output formats."""

import csv

import pytest

from ricb.cli import main, run


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A generated dataset plus an indexed bank, shared by the flow tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    gt = root / "gt.csv"
    bank = root / "bank.ricb"
    assert run([
        "make-dataset", "--out", str(data), "--classes", "3", "--per-class", "4",
        "--size", "48", "--seed", "5", "--gt", str(gt),
    ]) == 0
    assert run(["index", "--dataset", str(data), "--out", str(bank)]) == 0
    return {"root": root, "data": data, "gt": gt, "bank": bank}


# ---------------------------------------------------------------- plumbing

def test_version(capsys):
    assert run(["--version"]) == 0
    assert capsys.readouterr().out.startswith("ricb ")


def test_no_command_prints_usage(capsys):
    assert run([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["query", "--bogus"]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_required_flag_is_usage_error(capsys):
    assert run(["index", "--dataset", "somewhere"]) == 1
    assert "--out" in capsys.readouterr().err


@pytest.mark.parametrize("cmd,flag", [
    ("index", "--dataset"),
    ("query", "--bank"),
    ("eval-rotation", "--percents"),
    ("bench", "--sample"),
    ("estimate-rotated", "--threshold"),
    ("serve", "--listen"),
    ("make-dataset", "--per-class"),
])
def test_help_documents_flags(capsys, cmd, flag):
    assert run([cmd, "--help"]) == 0
    assert flag in capsys.readouterr().out


def test_main_uses_argv():
    assert main(["--version"]) == 0


# ---------------------------------------------------------------- flows

def test_make_dataset_and_index_outputs(workspace, capsys):
    assert (workspace["data"] / "dir00" / "000.png").is_file()
    assert workspace["bank"].is_file()
    assert workspace["bank"].with_name("bank.ricb.manifest.csv").is_file()
    with open(workspace["gt"], newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["id", "angle_deg"]
    assert len(rows) == 1 + 12


def test_index_reports_count_and_dim(workspace, tmp_path, capsys):
    out = tmp_path / "b2.ricb"
    assert run(["index", "--dataset", str(workspace["data"]), "--out", str(out)]) == 0
    assert "12 records, dim 1536" in capsys.readouterr().out


def test_query_self_match_tsv(workspace, capsys):
    member = workspace["data"] / "dir00" / "000.png"
    assert run([
        "query", "--bank", str(workspace["bank"]), "--image", str(member), "--k", "3",
    ]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert lines[0] == "1\tdir00/000.png\tdir00\t0.000000"
    assert [line.split("\t")[0] for line in lines] == ["1", "2", "3"]


def test_query_k_capped_by_bank_size(workspace, capsys):
    member = workspace["data"] / "dir01" / "001.png"
    assert run([
        "query", "--bank", str(workspace["bank"]), "--image", str(member), "--k", "50",
    ]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 12


@pytest.mark.parametrize("metric", ["l1", "l2", "cosine"])
def test_query_metric_flags(workspace, capsys, metric):
    member = workspace["data"] / "dir02" / "000.png"
    assert run([
        "query", "--bank", str(workspace["bank"]), "--image", str(member),
        "--k", "2", "--metric", metric,
    ]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_query_with_moments_estimator(workspace, capsys):
    member = workspace["data"] / "dir00" / "000.png"
    assert run([
        "query", "--bank", str(workspace["bank"]), "--image", str(member),
        "--k", "2", "--oad", "moments",
    ]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_query_missing_bank_is_runtime_error(tmp_path, capsys):
    assert run([
        "query", "--bank", str(tmp_path / "none.ricb"), "--image", "x.png",
    ]) == 2
    assert "ricb query: error:" in capsys.readouterr().err


def test_index_oracle_requires_gt(workspace, tmp_path, capsys):
    assert run([
        "index", "--dataset", str(workspace["data"]),
        "--out", str(tmp_path / "o.ricb"), "--oad", "oracle",
    ]) == 2
    assert "--gt" in capsys.readouterr().err


def test_index_oracle_with_gt(workspace, tmp_path):
    assert run([
        "index", "--dataset", str(workspace["data"]), "--out", str(tmp_path / "o.ricb"),
        "--oad", "oracle", "--gt", str(workspace["gt"]),
        "--oad-sigma", "0", "--oad-gross", "0",
    ]) == 0


def test_eval_rotation_single_clean_row(workspace, tmp_path, capsys):
    out = tmp_path / "row.csv"
    assert run([
        "eval-rotation", "--dataset", str(workspace["data"]), "--percents", "0",
        "--k", "3", "--oad", "oracle", "--oad-sigma", "0", "--oad-gross", "0",
        "--out", str(out),
    ]) == 0
    with open(out, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0][3] == "improvement"
    assert len(rows) == 2
    assert float(rows[1][3]) == 0.0
    assert float(rows[1][1]) == float(rows[1][2])
    assert "improvement" in capsys.readouterr().out


def test_eval_rotation_reproducible_csv(workspace, tmp_path):
    args = [
        "eval-rotation", "--dataset", str(workspace["data"]), "--percents", "0,100",
        "--k", "3", "--oad", "oracle", "--oad-sigma", "0", "--oad-gross", "0",
        "--seed", "9",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    with open(a, newline="") as f:
        rows = list(csv.reader(f))[1:]
    for row in rows:
        assert float(row[3]) == pytest.approx(float(row[2]) - float(row[1]), abs=1e-6)


def test_eval_rotation_rejects_bad_percent(workspace, tmp_path, capsys):
    assert run([
        "eval-rotation", "--dataset", str(workspace["data"]), "--percents", "0,120",
        "--oad", "oracle", "--out", str(tmp_path / "x.csv"),
    ]) == 2
    assert "error" in capsys.readouterr().err


def test_estimate_rotated_exact_fraction(tmp_path, capsys):
    data = tmp_path / "rotated"
    gt = tmp_path / "gt.csv"
    assert run([
        "make-dataset", "--out", str(data), "--classes", "3", "--per-class", "4",
        "--size", "48", "--seed", "6", "--rotated-fraction", "0.25", "--gt", str(gt),
    ]) == 0
    capsys.readouterr()
    assert run([
        "estimate-rotated", "--dataset", str(data), "--sample", "12",
        "--oad", "oracle", "--gt", str(gt), "--oad-sigma", "0", "--oad-gross", "0",
    ]) == 0
    assert capsys.readouterr().out.strip() == "0.2500"


def test_estimate_rotated_sample_too_large(workspace, capsys):
    assert run([
        "estimate-rotated", "--dataset", str(workspace["data"]), "--sample", "13",
        "--oad", "oracle", "--gt", str(workspace["gt"]),
    ]) == 2
    assert "sample" in capsys.readouterr().err


def test_bench_writes_both_arms(workspace, tmp_path, capsys):
    out = tmp_path / "timing.csv"
    assert run([
        "bench", "--bank", str(workspace["bank"]), "--queries", "4", "--k", "3",
        "--out", str(out),
    ]) == 0
    with open(out, newline="") as f:
        rows = list(csv.reader(f))
    assert [r[0] for r in rows] == ["arm", "with_oad", "without_oad"]
    assert rows[1][4] == "full"
    text = capsys.readouterr().out
    assert "with_oad" in text and "without_oad" in text


def test_bench_with_sample(workspace, tmp_path):
    out = tmp_path / "timing.csv"
    assert run([
        "bench", "--bank", str(workspace["bank"]), "--queries", "3", "--k", "2",
        "--sample", "6", "--out", str(out),
    ]) == 0
    with open(out, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[1][4] == "6" and rows[2][4] == "6"


def test_bench_oversized_sample_fails(workspace, tmp_path, capsys):
    assert run([
        "bench", "--bank", str(workspace["bank"]), "--sample", "100",
        "--out", str(tmp_path / "t.csv"),
    ]) == 2
    assert "sample" in capsys.readouterr().err


def test_make_dataset_rejects_bad_fraction(tmp_path, capsys):
    assert run([
        "make-dataset", "--out", str(tmp_path / "d"), "--rotated-fraction", "1.5",
    ]) == 2
    assert "rotated_fraction" in capsys.readouterr().err


def test_serve_missing_bank_is_runtime_error(tmp_path, capsys):
    assert run(["serve", "--bank", str(tmp_path / "none.ricb")]) == 2
    assert "ricb serve: error:" in capsys.readouterr().err


def test_worker_env_validation(workspace, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RICB_THREADS", "lots")
    assert run([
        "index", "--dataset", str(workspace["data"]), "--out", str(tmp_path / "x.ricb"),
    ]) == 2
    assert "RICB_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("RICB_THREADS", "2")
    assert run([
        "index", "--dataset", str(workspace["data"]), "--out", str(tmp_path / "x.ricb"),
    ]) == 0
