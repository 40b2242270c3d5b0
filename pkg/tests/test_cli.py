import json
import math

import pytest

from csf.bench import read_bench_csv
from csf.cli import build_parser, main
from csf.scan import load_scan


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def square_scan(tmp_path):
    out = tmp_path / "square.scan"
    assert run("generate", "--world", "square", "--out", out) == 0
    return out


def test_generate_square_has_360_points(square_scan):
    assert len(load_scan(square_scan)) == 360


def test_generate_is_deterministic_and_honours_env_seed(tmp_path, monkeypatch):
    a, b, c = (tmp_path / f"{k}.scan" for k in "abc")
    run("generate", "--world", "env_b_like", "--seed", 4, "--out", a)
    monkeypatch.setenv("CSF_SEED", "4")
    run("generate", "--world", "env_b_like", "--out", b)
    monkeypatch.setenv("CSF_SEED", "5")
    run("generate", "--world", "env_b_like", "--out", c)
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_generate_with_explicit_pose_and_noise(tmp_path):
    out = tmp_path / "s.scan"
    assert run("generate", "--world", "square", "--pose", "0.5,-0.2,30", "--rays", 90,
               "--applied-sigma-rho-m", 0.01, "--out", out) == 0
    scan = load_scan(out)
    assert len(scan) == 90
    assert scan.metadata["applied_sigma_rho_m"] == "0.01"
    x, y, h = (float(v) for v in scan.metadata["pose"].split(","))
    assert (x, y, h) == pytest.approx((0.5, -0.2, math.radians(30)), abs=1e-15)


@pytest.mark.parametrize("method", ["wclm", "arras", "siadat"])
def test_extract_square(square_scan, tmp_path, method):
    out = tmp_path / "f.json"
    assert run("extract", "--scan", square_scan, "--method", method, "--out", out) == 0
    d = json.loads(out.read_text())
    assert len(d["lines"]) == 4 and len(d["corners"]) == 4 and d["method"] == method


def test_extract_threshold_flag_is_in_mm(square_scan, tmp_path):
    out = tmp_path / "f.json"
    run("extract", "--scan", square_scan, "--threshold-mm", 5, "--out", out)
    assert json.loads(out.read_text())["config"]["threshold_m"] == 0.005


def test_compare_and_plot(square_scan, tmp_path):
    table = tmp_path / "t.tsv"
    assert run("compare", "--scan", square_scan, "--out", table) == 0
    assert len(table.read_text().splitlines()) == 6
    feats, svg = tmp_path / "f.json", tmp_path / "m.svg"
    run("extract", "--scan", square_scan, "--out", feats)
    assert run("plot", "--features", feats, "--scan", square_scan, "--out", svg) == 0
    text = svg.read_text()
    assert text.count('class="corner"') == 4 and text.count("<ellipse") == 4


def test_bench_command(tmp_path):
    scan = tmp_path / "b.scan"
    run("generate", "--world", "env_b_like", "--out", scan)
    prefix = tmp_path / "bench"
    assert run("bench", "--scan", scan, "--corner", 7, "--ladder", "10..30..10", "--reps", 31,
               "--out-prefix", prefix, "--arras-fast") == 0
    rows = read_bench_csv(f"{prefix}.csv")
    assert [r["n_points"] for r in rows] == [10, 20, 30]
    assert (tmp_path / "bench.svg").exists() and (tmp_path / "bench_arras_fast.csv").exists()


def test_exit_codes(square_scan, tmp_path, capsys):
    out = tmp_path / "x"
    # 2: configuration / usage
    assert run("bench", "--scan", square_scan, "--corner", 0, "--reps", 5, "--out-prefix", out) == 2
    assert run("bench", "--scan", square_scan, "--corner", 0, "--ladder", "9..1..1",
               "--out-prefix", out) == 2
    with pytest.raises(SystemExit) as exc:
        run("extract", "--scan", square_scan)
    assert exc.value.code == 2
    # 3: invalid input
    bad = tmp_path / "bad.scan"
    bad.write_text("0.0\t1.0\n0.1\tfoo\n")
    assert run("extract", "--scan", bad, "--out", out) == 3
    assert ":2:" in capsys.readouterr().err
    other = tmp_path / "other.scan"
    run("generate", "--world", "env_b_like", "--out", other)
    feats = tmp_path / "f.json"
    run("extract", "--scan", square_scan, "--out", feats)
    assert run("plot", "--features", feats, "--scan", other, "--out", out) == 3
    # 4: degenerate geometry
    assert run("generate", "--world", "square", "--pose", "2,0,0", "--out", out) == 4
    # 5: I/O
    assert run("extract", "--scan", tmp_path / "missing.scan", "--out", out) == 5
    assert run("extract", "--scan", square_scan, "--out", tmp_path / "no" / "dir.json") == 5


def test_help_documents_default_provenance():
    text = build_parser()._subparsers._group_actions[0].choices["extract"].format_help()
    assert "published segmentation threshold" in text
    gen = build_parser()._subparsers._group_actions[0].choices["generate"].format_help()
    assert "RPLiDAR S1" in gen


def test_pipeline_outputs_are_byte_identical_across_runs(tmp_path):
    def pipeline(d):
        d.mkdir()
        run("generate", "--world", "env_b_like", "--out", d / "s.scan")
        run("extract", "--scan", d / "s.scan", "--method", "siadat", "--out", d / "f.json")
        run("compare", "--scan", d / "s.scan", "--out", d / "c.tsv")
        run("plot", "--features", d / "f.json", "--scan", d / "s.scan", "--out", d / "m.svg")
        return {p.name: p.read_bytes() for p in d.iterdir()}

    assert pipeline(tmp_path / "one") == pipeline(tmp_path / "two")
