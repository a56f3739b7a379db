import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from fmb import bodies as bd
from fmb import cli
from fmb import meanbodies as mb
from fmb import starops as so


@pytest.fixture
def square_json(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps(bd.body_to_json(bd.cube(2))))
    return path


@pytest.fixture
def triangle_json(tmp_path):
    path = tmp_path / "triangle.json"
    path.write_text(json.dumps(bd.body_to_json(bd.simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))))
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def test_compute_radial_half_of_square(square_json, capsys):
    code, out, err = run(["compute", "--body", square_json, "--family", "R", "--p", 0.5, "--grid", 16], capsys)
    assert code == 0 and err == ""
    sample = so.read_star_csv(out)
    assert sample.size == 16
    assert sample.radii[0] == pytest.approx((1 / 1.5) ** 2, abs=1e-12)
    assert sample.radii[0] == pytest.approx(0.4444, abs=1e-4)


def test_compute_fourier_curves_convexity(tmp_path, capsys):
    body = tmp_path / "sq.json"
    body.write_text(json.dumps(bd.body_to_json(bd.box([1.0, 1.0]))))
    out_half, out_nc = tmp_path / "half.csv", tmp_path / "nc.csv"
    assert run(["compute", "--body", body, "--family", "F", "--p", 0.5, "--grid", 720, "--out", out_half], capsys)[0] == 0
    assert run(["compute", "--body", body, "--family", "F", "--p", 1.5, "--grid", 720, "--out", out_nc], capsys)[0] == 0
    assert so.convexity_check_2d(so.read_star_csv(out_half.read_text())).convex
    assert not so.convexity_check_2d(so.read_star_csv(out_nc.read_text())).convex


def test_compute_warns_on_divergent_radii(tmp_path, capsys):
    body = tmp_path / "sq.json"
    body.write_text(json.dumps(bd.body_to_json(bd.box([1.0, 1.0]))))
    code, out, err = run(["compute", "--body", body, "--family", "F", "--p", 2, "--grid", 16], capsys)
    assert code == 0
    assert "warning" in err and "inf" in err
    assert ",inf," in out


def test_compute_round_trip_volume_is_bit_exact(square_json, tmp_path, capsys):
    out = tmp_path / "r2.csv"
    assert run(["compute", "--body", square_json, "--family", "R", "--p", 2, "--grid", 64, "--out", out], capsys)[0] == 0
    back = so.read_star_csv(out.read_text())
    direct = mb.sample_family(bd.cube(2), "R", 2.0, 64)
    assert so.star_volume(back) == so.star_volume(direct)


def test_compute_routes(square_json, capsys):
    _, direct, _ = run(["compute", "--body", square_json, "--family", "F", "--p", 0.5, "--grid", 8], capsys)
    code, zroute, _ = run(["compute", "--body", square_json, "--family", "F", "--p", 0.5, "--grid", 8, "--route", "z_route"], capsys)
    assert code == 0
    assert so.read_star_csv(zroute).radii == pytest.approx(so.read_star_csv(direct).radii, rel=1e-10)
    code, _, err = run(["compute", "--body", square_json, "--family", "F", "--p", 1.5, "--grid", 8, "--route", "z_route"], capsys)
    assert code == 2 and "z_route" in err


def test_compute_tol_override(square_json, capsys):
    code, _, _ = run(["compute", "--body", square_json, "--p", 1, "--grid", 8, "--tol", "grid=64"], capsys)
    assert code == 0
    code, _, err = run(["compute", "--body", square_json, "--p", 1, "--tol", "nonsense=1"], capsys)
    assert code == 2 and "--tol" in err


def test_compute_invalid_body_reports_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "box", "half_widths": [1.0, -1.0]}))
    code, out, err = run(["compute", "--body", bad, "--p", 1], capsys)
    assert code == 2 and out == ""
    assert "invalid body" in err and "  - " in err


def test_compute_unreadable_and_malformed_bodies(tmp_path, capsys):
    assert run(["compute", "--body", tmp_path / "missing.json", "--p", 1], capsys)[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, err = run(["compute", "--body", broken, "--p", 1], capsys)
    assert code == 2 and "invalid JSON" in err


@pytest.mark.parametrize("grid", ["4", "7", "abc"])
def test_compute_rejects_small_grids(square_json, grid, capsys):
    code, _, err = run(["compute", "--body", square_json, "--p", 1, "--grid", grid], capsys)
    assert code == 2 and "grid" in err


def test_compute_rejects_infinite_order(square_json, capsys):
    assert run(["compute", "--body", square_json, "--p", "inf"], capsys)[0] == 2


def test_compute_domain_error_is_usage_error(square_json, capsys):
    code, _, err = run(["compute", "--body", square_json, "--family", "R", "--p", -2], capsys)
    assert code == 2 and "p > -1" in err


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_nonconvexity_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["verify", "--suite", "nonconvexity", "--p", 1.5, "--out", out], capsys)
    assert code == 0
    data = json.loads(out.read_text())
    limit = [r for r in data["reports"] if r["check_id"] == "nonconvexity.limit"]
    assert limit and limit[0]["rhs"] == pytest.approx(-0.3125)
    assert data["passed"] is True


def test_verify_chains_on_triangle(triangle_json, capsys):
    code, out, _ = run(["verify", "--suite", "chains", "--body", triangle_json], capsys)
    assert code == 0
    data = json.loads(out)
    simplex = [r for r in data["reports"] if r["check_id"] == "chains.simplex_equality"]
    assert simplex and all(r["pass"] for r in simplex)
    assert {r["body_id"] for r in data["reports"]} == {"triangle"}


def test_verify_unknown_suite(capsys):
    code, out, err = run(["verify", "--suite", "bogus"], capsys)
    assert code == 2 and out == "" and "unknown suite" in err


def test_verify_failure_exit_code(monkeypatch, capsys):
    from fmb import verify as vf

    failing = vf.SuiteResult(0, (vf.make_report("x.fail", "b", {}, 2.0, 1.0, "le", 0.0),), (), ())
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: failing)
    code, out, err = run(["verify", "--suite", "misc"], capsys)
    assert code == 1
    assert json.loads(out)["passed"] is False
    assert "FAIL x.fail" in err


def test_verify_same_seed_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["verify", "--suite", "berwald1d", "--seed", 42, "--out", path], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# plot and schema
# ---------------------------------------------------------------------------


def test_plot_writes_one_file_per_order(tmp_path, capsys):
    code, out, _ = run(["plot", "--grid", 512, "--out", tmp_path], capsys)
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fourier_square_p0.5.csv", "fourier_square_p1.5.csv", "fourier_square_p1.csv"]
    assert "p=1.5 not convex" in out and "p=0.5 convex" in out
    rows = (tmp_path / "fourier_square_p1.csv").read_text().splitlines()
    assert rows[0] == "angle,rho,x,y" and len(rows) == 513
    angle, rho, x, y = map(float, rows[5].split(","))
    assert x == pytest.approx(rho * math.cos(angle)) and y == pytest.approx(rho * math.sin(angle))


def test_schema_kinds(capsys):
    code, out, _ = run(["schema"], capsys)
    assert code == 0 and set(json.loads(out)) == {"body", "report"}
    code, out, _ = run(["schema", "--kind", "body"], capsys)
    assert code == 0 and json.loads(out) == bd.BODY_SCHEMA
    code, out, _ = run(["schema", "--kind", "report"], capsys)
    assert code == 0 and "reports" in json.loads(out)["properties"]
    assert run(["schema", "--kind", "nope"], capsys)[0] == 2


def test_body_schema_accepts_written_bodies():
    jsonschema = pytest.importorskip("jsonschema")
    for body in (bd.cube(2), bd.ball(3), bd.random_polygon(6, 1), bd.simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])):
        jsonschema.validate(bd.body_to_json(body), bd.BODY_SCHEMA)


def test_missing_command_is_usage_error(capsys):
    assert run([], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2


def test_help_exits_zero(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0 and "compute" in out


# ---------------------------------------------------------------------------
# Atomic output
# ---------------------------------------------------------------------------


def test_write_atomic_replaces_and_leaves_no_temporaries(tmp_path):
    target = tmp_path / "sub" / "out.txt"
    cli.write_atomic(target, "first")
    cli.write_atomic(target, "second")
    assert target.read_text() == "second"
    assert os.listdir(target.parent) == ["out.txt"]


def test_write_atomic_keeps_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.txt"
    target.write_text("old")

    def boom(src, dst):
        raise OSError("rename failed")

    monkeypatch.setattr(cli.os, "replace", boom)
    with pytest.raises(OSError):
        cli.write_atomic(target, "new")
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fmb", "schema", "--kind", "body"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == bd.BODY_SCHEMA
