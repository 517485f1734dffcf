import csv
import json

import pytest

from schottky_lab.cli import main, run
from schottky_lab.config import RunConfig, describe_defaults
from schottky_lab.errors import ConfigError


def _run(tmp_path, *args):
    code = main([*args, "--out", str(tmp_path), "--quiet"])
    return code


def _report(tmp_path, command):
    return json.loads((tmp_path / f"{command}.json").read_text())


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_curvature_scan_hyperbolic(tmp_path):
    assert _run(tmp_path, "curvature-scan", "--alpha", "0") == 0
    rows = _csv(tmp_path / "curvature.csv")
    assert rows[0] == ["sigma", "u", "du", "d2u", "K"]
    assert len(rows) == 4001
    assert all(abs(float(r[4]) + 1.0) <= 1e-12 for r in rows[1:])
    doc = _report(tmp_path, "curvature-scan")
    assert doc["schema_version"] == 1 and doc["result"]["pinched"]


def test_rho_after_calibration(tmp_path):
    assert _run(tmp_path, "rho", "--a", "0", "--s", "0.5") == 0
    res = _report(tmp_path, "rho")["result"]
    assert res["rho"] < 1 and res["calibration_power"] == 9
    assert res["residual"] <= 1e-8


def test_classify_auto(tmp_path):
    assert _run(tmp_path, "classify", "--a", "auto", "--alpha", "1.5") == 0
    res = _report(tmp_path, "classify")["result"]
    assert (res["pgc"], res["type"], res["ps_measure"]) == ("fails", "divergent", "infinite")
    rows = _csv(tmp_path / "regime.csv")
    assert rows[0][0] == "a" and len(rows) == 2


def test_classify_bracket_rows(tmp_path):
    assert _run(tmp_path, "classify", "--c-bracket", "0.3") == 0
    assert len(_report(tmp_path, "classify")["result"]["rows"]) == 2


def test_undecided_exit_code(tmp_path):
    # exactly at a* the convergence ratio straddles 1 within the tail bounds
    assert _run(tmp_path, "group-series", "--a", "auto") == 2


@pytest.mark.parametrize("command", ["find-astar", "find-delta", "monotonicity",
                                     "parabolic-series", "group-series"])
def test_commands_succeed(tmp_path, command):
    extra = ["--a", "1.0"] if command in ("find-delta", "group-series") else []
    assert _run(tmp_path, command, *extra) == 0
    assert _report(tmp_path, command)["command"] == command


def test_geodesic_check(tmp_path):
    assert _run(tmp_path, "geodesic-check", "--variant", "pure_log",
                "--D-grid", "log:0.1:100:20") == 0
    assert _report(tmp_path, "geodesic-check")["result"]["max_error_vs_arccosh"] < 1e-6


def test_atlas_outputs(tmp_path):
    assert _run(tmp_path, "atlas", "--a-grid", "0, 2.63, 12") == 0
    rows = _csv(tmp_path / "atlas.csv")
    assert [r[6] for r in rows[1:]] == ["convergent", "divergent", "divergent"]
    assert (tmp_path / "rho_surface.csv").exists() and (tmp_path / "atlas-trace.csv").exists()


def test_level1_matrix_dump(tmp_path):
    assert _run(tmp_path, "rho", "--level", "1", "--a", "1",
                "--set", "output.dump_matrix=true") == 0
    rows = _csv(tmp_path / "matrix.csv")
    assert rows[0] == ["row", "col", "value"] and len(rows) > 1


def test_byte_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["find-astar", "--out", str(d), "--quiet"]) == 0
    for name in ("find-astar.json", "find-astar-trace.csv"):
        assert (a / name).read_bytes().replace(b"/a", b"/b") == (b / name).read_bytes()


def test_errors_exit_one(tmp_path, capsys):
    assert _run(tmp_path, "geodesic-check", "--variant", "remark24") == 1
    assert _run(tmp_path, "rho", "--alpha", "1.0") == 1
    assert _run(tmp_path, "rho", "--set", "solver.bogus=1") == 1
    assert _run(tmp_path, "rho", "--level", "3") == 1
    assert "error:" in capsys.readouterr().err


def test_bad_config_file_line_number(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[profile]\nalpha = 1.5\n\n[solver]\nM = 10\n")
    assert main(["rho", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert f"{cfg}:5:" in capsys.readouterr().err


def test_config_parsing():
    cfg = RunConfig.from_text("[model]\nc = 0.2   # defect\n[solver]\na_grid = 0:4:5\n"
                              "D_grid = log:1:100:3\n")
    assert cfg.get("model", "c") == 0.2
    assert cfg.get("solver", "a_grid") == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert cfg.get("solver", "D_grid") == pytest.approx([1.0, 10.0, 100.0])
    for text, line in (("[nope]\nx = 1\n", 1), ("[model]\n\nfoo = 1\n", 3),
                       ("[solver]\ntol_delta = -1\n", 2), ("[model]\ncalibrate = maybe\n", 2)):
        with pytest.raises(ConfigError, match=f":{line}:"):
            RunConfig.from_text(text)
    with pytest.raises(ConfigError):
        RunConfig.from_text("no section header\n")
    assert "tol_delta" in describe_defaults()


def test_run_api(tmp_path):
    cfg = RunConfig.defaults()
    cfg.set("output", "dir", str(tmp_path))
    cfg.set("output", "formats", "json")
    status, doc = run("find-astar", cfg)
    assert status == 0 and doc["artifacts"] == []
    with pytest.raises(ConfigError):
        run("plot", cfg)


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "tol_delta = 1e-06" in out and "D_grid = log:1:10000:25" in out
    assert "critical depth a*" in out
