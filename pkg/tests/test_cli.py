from __future__ import annotations

import csv

import numpy as np
import pytest

from levykpz import cli
from levykpz.config import load_config, parse_config
from levykpz.spectral import PeriodicGrid, write_snapshot

LINEAR = "[experiment]\npreset = linear-selfsim\n"


def report_lines(out):
    return (out / "report.txt").read_text(encoding="utf-8").splitlines()


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_linear_run_passes_and_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    status = cli.execute(parse_config(LINEAR), out)
    assert status == cli.EXIT_OK
    lines = report_lines(out)
    assert lines[0] == "preset: linear-selfsim"
    assert any(ln.split()[:2] == ["PASS", "self-similar-decay"] for ln in lines)
    assert lines[-1] == "overall: PASS"
    with open(out / "diagnostics.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[-1]["t"]) == 64.0
    assert (out / "fits.csv").exists()


def test_runs_are_deterministic(tmp_path):
    text = "[experiment]\npreset = linear-selfsim\nseed = 3\n[problem]\nhorizon = 16\n[initial]\nnoise = 0.2\n"
    a, b = tmp_path / "a", tmp_path / "b"
    cli.execute(parse_config(text), a)
    cli.execute(parse_config(text), b)
    for name in ("diagnostics.csv", "fits.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_changes_noise():
    base = "[experiment]\npreset = linear-selfsim\nseed = {}\n[initial]\nnoise = 0.2\n"
    u1, _ = cli.build_initial(parse_config(base.format(1)))
    u2, _ = cli.build_initial(parse_config(base.format(2)))
    u1b, _ = cli.build_initial(parse_config(base.format(1)))
    assert np.array_equal(u1.values, u1b.values)
    assert not np.allclose(u1.values, u2.values)


def test_snapshots_and_file_initial(tmp_path):
    cfg = parse_config("[experiment]\npreset = linear-selfsim\nsnapshots = true\n[problem]\nhorizon = 4\n")
    out = tmp_path / "snap"
    cli.execute(cfg, out)
    snaps = sorted((out / "snapshots").glob("u_*.bin"))
    assert len(snaps) >= 2

    grid = PeriodicGrid(1, 1024, 128.0)
    write_snapshot(tmp_path / "u0.bin", grid.gaussian(2.0, 1.5))
    path = write_cfg(tmp_path, "[experiment]\npreset = linear-selfsim\n"
                     "[initial]\nkind = file\npath = u0.bin\n")
    u0, _ = cli.build_initial(load_config(path))
    assert np.allclose(u0.values, grid.gaussian(2.0, 1.5).values)


def test_short_horizon_is_not_reported_as_pass(tmp_path):
    cfg = parse_config("[experiment]\npreset = linear-selfsim\n[problem]\nhorizon = 4\n")
    out = tmp_path / "short"
    assert cli.execute(cfg, out) == cli.EXIT_FAIL
    assert report_lines(out)[-1] == "overall: INCONCLUSIVE"


def test_under_resolved_datum_exits_with_solver_status(tmp_path):
    cfg = parse_config("[experiment]\npreset = linear-selfsim\n[initial]\nwidth = 0.01\n")
    out = tmp_path / "bad"
    assert cli.execute(cfg, out) == cli.EXIT_SOLVER
    lines = report_lines(out)
    assert lines[-1] == "overall: FAIL"
    assert not any(ln.startswith("PASS") for ln in lines)


def test_report_never_claims_pass_on_failure(tmp_path):
    checks = [cli.Check("a", "PASS", ""), cli.Check("b", "FAIL", "x")]
    cfg = parse_config(LINEAR)
    cli._write_report(tmp_path / "r.txt", cfg, [], checks)
    assert (tmp_path / "r.txt").read_text().splitlines()[-1] == "overall: FAIL"
    assert cli._exit_for(checks) == cli.EXIT_FAIL
    assert cli._exit_for([cli.Check("a", "INCONCLUSIVE", "")]) == cli.EXIT_FAIL
    assert cli._exit_for([]) == cli.EXIT_FAIL


def test_sweep_row_regimes():
    dep = parse_config("[experiment]\npreset = deposition-subcritical\n"
                       "[problem]\nhorizon = 64\nq = 1.05\n[grid]\nn = 512\nlbox = 256\n")
    u0, _ = cli.build_initial(dep)
    row = cli.sweep_row(dep, 1.05, u0)
    assert row["regime"] == "growing" and row["mass_ratio"] > 2

    lin = parse_config(LINEAR)
    u0, _ = cli.build_initial(lin)
    row = cli.sweep_row(lin, 2.0, u0)
    assert row["regime"] == "plateau"
    assert abs(row["mass_slope"]) < 1e-6


def test_classifiers():
    assert cli.classify_regime(-1, 0.3) == "decaying-to-zero"
    assert cli.classify_regime(1, 0.3) == "growing"
    assert cli.classify_regime(1, -0.1) == "plateau"
    assert cli.classify_regime(0, 0.3) == "plateau"
    assert cli.threshold_regime(0.1, -0.5, 0.5) == "decaying-to-zero"
    assert cli.threshold_regime(1.0, 0.0, 0.001) == "plateau"
    assert cli.threshold_regime(5.0, 0.5, 0.5) == "growing"
    assert cli.threshold_regime(0.5, -0.1, 0.5) == "unclassified"
    rows = [{"q": q, "regime": r} for q, r in
            ((1.1, "decaying-to-zero"), (1.2, "decaying-to-zero"), (1.3, "plateau"), (1.4, "plateau"))]
    assert cli.sweep_transition(rows) == pytest.approx(1.25)
    rows[3]["regime"] = "decaying-to-zero"
    assert cli.sweep_transition(rows) is None


def test_main_validate_exit_codes(tmp_path, capsys):
    good = write_cfg(tmp_path, "[experiment]\npreset = linear-selfsim\n", "good.cfg")
    bad = write_cfg(tmp_path, "[experiment]\npreset = evaporation-subcritical\n"
                    "[problem]\nlambda = 1\n", "bad.cfg")
    assert cli.main(["validate", str(good)]) == cli.EXIT_OK
    assert cli.main(["validate", str(bad)]) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 4" in err and "lambda < 0" in err
    assert cli.main(["validate", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG


def test_main_run_writes_report(tmp_path, capsys):
    path = write_cfg(tmp_path, LINEAR)
    out = tmp_path / "o"
    assert cli.main(["run", str(path), "--output", str(out)]) == cli.EXIT_OK
    assert "report:" in capsys.readouterr().out
    assert report_lines(out)[-1] == "overall: PASS"


def test_main_kernel_cauchy_value(capsys):
    status = cli.main(["kernel", "--alpha", "1", "--t", "1", "--grid", "1,32768,1024", "--points", "0,1"])
    assert status == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    p0 = float(lines[0].split()[-1])
    p1 = float(lines[1].split()[-1])
    assert p0 == pytest.approx(1 / np.pi, rel=1e-3)
    assert p1 == pytest.approx(1 / (2 * np.pi), rel=1e-3)
    assert cli.main(["kernel", "--alpha", "1", "--t", "1", "--grid", "2,64,8", "--points", "0"]) == cli.EXIT_CONFIG
