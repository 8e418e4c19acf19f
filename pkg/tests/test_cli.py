import json

import numpy as np
import pytest

from carnot_spheres import cli
from carnot_spheres import jsonio


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_build_then_verify(tmp_path, capsys):
    ball = tmp_path / "ball.json"
    code, rep, _ = run(capsys, "heis", "build", "--g", "abs-x", "--out", str(ball))
    assert code == 0 and rep["b"] == 4.25
    code, rep, _ = run(capsys, "ball", "verify", str(ball), "--samples", "5000", "--seed", "7")
    assert code == 0 and rep["passed"]


def test_broken_group_exit_1(tmp_path, capsys):
    f = tmp_path / "broken.json"
    f.write_text(json.dumps({"weights": [1, 1, 1], "brackets": [[0, 1, 2, 1.0]]}))
    code, rep, _ = run(capsys, "group", "validate", str(f))
    assert code == 1
    assert rep["witness"]["identity"] == "grading"


def test_usage_errors_exit_2(tmp_path, capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "ball", "verify", "missing.json", "--seed", "1")[0] == 2
    # sampling without a seed
    assert run(capsys, "plane", "yregion", "--C", "1")[0] == 2
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"command": "plane yregion", "seed": 1, "colour": "blue"}))
    assert run(capsys, "--config", str(f))[0] == 2
    f.write_text(json.dumps({"command": "plane yregion", "seed": 1, "params": {"bogus": 1}}))
    assert run(capsys, "--config", str(f))[0] == 2
    assert run(capsys, "--preset", "no-such-preset")[0] == 2


def test_failing_verification_exit_1(capsys):
    code, rep, _ = run(capsys, "plane", "yregion", "--C", "1.25", "--samples", "20000", "--seed", "0")
    assert code == 1
    assert rep["explicit_witness"]["p"] == [-1.0, 2.25]


def test_fractal_paper_preset(capsys):
    code, rep, _ = run(capsys, "plane", "fractal", "--preset", "paper", "--dim")
    assert code == 0
    assert 1.4 <= rep["dimension"]["dimension"] <= 1.6


def test_preset_dir_override(tmp_path, capsys, monkeypatch):
    (tmp_path / "mine.json").write_text(json.dumps(
        {"command": "control endpoint", "group": "heisenberg", "params": {"u": "1,0;0,1"}}))
    monkeypatch.setenv("CARNOT_PRESET_DIR", str(tmp_path))
    code, rep, _ = run(capsys, "--preset", "mine")
    assert code == 0
    np.testing.assert_allclose(rep["endpoint"], [0.5, 0.5, 0.125])
    assert "mine" in cli.list_presets()


def test_every_acceptance_item_has_a_preset():
    from carnot_spheres import experiments
    names = set(cli.list_presets())
    assert set(experiments.ACCEPTANCE_ORDER) <= names


def test_reports_identical_across_workers(tmp_path, capsys):
    outs = []
    for w in ("1", "2"):
        cli.run(["ball", "euclid", "--group", "heisenberg", "--radii", "1,8", "--samples", "6000",
                 "--seed", "3", "--workers", w])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_out_file_and_csv(tmp_path, capsys):
    rep_path = tmp_path / "rep.json"
    code, rep, _ = run(capsys, "control", "jacobian", "--group", "engel", "--u", "1,0;0,1;1,1",
                       "--fd", "--out", str(rep_path))
    assert code == 0 and rep["fd_relative_error"] < 1e-5
    assert jsonio.load(rep_path) == rep
    csv_path = tmp_path / "s.csv"
    code, rep, _ = run(capsys, "sphere", "sample", "--group", "heisenberg", "--gauge", "koranyi",
                       "--samples", "50", "--seed", "0", "--out", str(csv_path))
    assert code == 0
    header, data = jsonio.read_csv(csv_path)
    assert data.shape == (50, 7)


@pytest.mark.parametrize("argv", [
    ["group", "info", "engel"],
    ["norm", "eval", "--group", "heisenberg", "--gauge", "cc", "--point", "0,0,1"],
    ["norm", "axioms", "--group", "heisenberg", "--gauge", "koranyi", "--samples", "500", "--seed", "0"],
    ["norm", "equiv", "--group", "heisenberg", "--gauge", "koranyi", "--against", "cc", "--samples", "500", "--seed", "0"],
    ["norm", "holder", "--group", "heisenberg", "--gauge", "cc", "--samples", "500", "--seed", "0"],
    ["heis", "check62", "--g", "zero", "--b", "0.25", "--n-points", "60"],
    ["plane", "remark", "--samples", "2000", "--seed", "0"],
    ["control", "endpoint", "--group", "engel", "--u", "1,0;0,1", "--ode", "--steps", "100"],
    ["control", "tau", "--group", "heisenberg_times_line", "--u", "0,0,1", "--m", "8", "--seed", "0"],
    ["control", "scan", "--group", "heisenberg", "--m", "4", "--count", "12"],
    ["control", "geodesic", "--group", "heisenberg", "--target", "1,0,0", "--m", "8", "--restarts", "2",
     "--seed", "0", "--expect", "1"],
    ["control", "d0sq", "--group", "heisenberg", "--samples", "300", "--seed", "0"],
    ["sphere", "regularity", "--group", "heisenberg", "--gauge", "cc", "--line-base", "0,0,0",
     "--direction", "0,0,1", "--seed", "0", "--expect", "0.5"],
    ["sphere", "cusp", "--group", "heisenberg", "--gauge", "cc", "--expect", "1.0"],
    ["sphere", "dim", "--group", "heisenberg", "--gauge", "koranyi", "--samples", "100000", "--seed", "0", "--s", "2"],
    ["experiment", "list"],
])
def test_commands_pass(argv, capsys):
    code, rep, err = run(capsys, *argv)
    assert code == 0, err
    assert rep["passed"]


def test_check62_without_offset_fails(capsys):
    code, rep, _ = run(capsys, "heis", "check62", "--g", "zero", "--b", "0", "--n-points", "40")
    assert code == 1 and rep["min_margin"] == pytest.approx(-0.125)


def test_ball_kinds(tmp_path, capsys):
    f = tmp_path / "b.json"
    for desc in ({"kind": "euclidean", "group": "heisenberg", "radius": 1.0},
                 {"kind": "yregion", "C": 1.0}, {"kind": "remark"},
                 {"kind": "gauge", "group": "heisenberg", "gauge": "koranyi",
                  "bounding_radius": 1.0, "interior_radius": 0.4}):
        f.write_text(json.dumps(desc))
        code, rep, _ = run(capsys, "ball", "verify", str(f), "--samples", "1000", "--seed", "0",
                           "--checks", "combination")
        assert code == 0, desc
