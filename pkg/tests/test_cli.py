import csv
import math
import os

import numpy as np
import pytest

from debond.cli import main
from debond.config import emit_config, load_config, parse_config

STATIC_ZERO = """\
T: 3.0
solver: {h: 1.0e-3, scheme: heun}
toughness: {preset: constant, value: 1.0}
initial:
  ell0: 1.0
  regularity: C01
  y0: {preset: constant, value: 0.0}
  y1: {preset: constant, value: 0.0}
control:
  u: {preset: constant, value: 0.0}
target:
  ellbar0: 1.0
  regularity: C01
  ybar0: {preset: constant, value: 0.0}
  ybar1: {preset: constant, value: 0.0}
"""

CONSTANT_SPEED = """\
T: 6.0
solver: {h: 1.0e-3, scheme: heun}
toughness: {preset: constant, value: 0.5}
initial:
  ell0: 1.0
  regularity: C01
  y0: {preset: constant, value: 0.0}
  y1: {preset: constant, value: 2.0}
control:
  u: {preset: constant, value: 0.0}
"""

EXPANSION = """\
T: 6.0
solver: {h: 1.0e-3, scheme: heun}
toughness: {preset: constant, value: 1.0}
initial:
  ell0: 1.0
  regularity: C01
  y0: {preset: constant, value: 0.0}
  y1: {preset: constant, value: 0.0}
target:
  ellbar0: 2.0
  regularity: C01
  ybar0: {preset: constant, value: 0.0}
  ybar1: {preset: constant, value: 0.0}
branch: {policy: prefer_static}
"""

BAD_TARGET = """\
T: 5.0
solver: {h: 1.0e-3, scheme: heun}
toughness: {preset: constant, value: 1.0}
initial:
  ell0: 1.0
  regularity: C01
  y0: {preset: constant, value: 0.0}
  y1: {preset: constant, value: 0.0}
target:
  ellbar0: 1.0
  regularity: C01
  ybar0: {preset: linear, intercept: 2.0, slope: -2.0}
  ybar1: {preset: constant, value: 4.0}
"""


def run(tmp_path, doc, command, *extra):
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(doc)
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


def read_csv(path):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def read_keyvals(path):
    out = {}
    for line in path.read_text().splitlines():
        key, value = line.split("=", 1)
        out[key] = value
    return out


def test_simulate_static(tmp_path):
    code, out = run(tmp_path, STATIC_ZERO, "simulate")
    assert code == 0
    front = read_csv(out / "front.csv")
    assert np.max(np.abs(front["ell"] - 1.0)) <= 1e-12
    assert np.all(np.diff(front["t"]) > 0)
    for name in ("trace.csv", "control.csv", "state_at_T.csv"):
        assert (out / name).exists()


def test_simulate_constant_speed_final_value(tmp_path):
    code, out = run(tmp_path, CONSTANT_SPEED, "simulate")
    assert code == 0
    front = read_csv(out / "front.csv")
    assert front["ell"][-1] == pytest.approx(4.0, abs=5e-3)


def test_missing_T_names_field(tmp_path, capsys):
    doc = STATIC_ZERO.replace("T: 3.0\n", "")
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(doc)
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "T" in capsys.readouterr().err


def test_incompatible_data_exits_3(tmp_path):
    doc = STATIC_ZERO.replace(
        "y1: {preset: constant, value: 0.0}\ncontrol",
        "y1: {preset: constant, value: 0.0}\n  # y0(0) = 1 with u(0) = 0\ncontrol",
    ).replace(
        "y0: {preset: constant, value: 0.0}\n  y1",
        "y0: {preset: linear, intercept: 1.0, slope: -1.0}\n  y1",
    )
    code, _ = run(tmp_path, doc, "simulate")
    assert code == 3


def test_initial_branch_command(tmp_path):
    code, out = run(tmp_path, CONSTANT_SPEED, "initial-branch")
    assert code == 0
    info = read_keyvals(out / "initial_branch.txt")
    assert float(info["t_star"]) == pytest.approx(2.5, abs=5e-3)


def test_final_branch_command(tmp_path):
    doc = EXPANSION.replace("ybar1: {preset: constant, value: 0.0}",
                            "ybar1: {preset: constant, value: 0.8164965809277259}")
    code, out = run(tmp_path, doc, "final-branch", "--policy", "prefer_moving")
    assert code == 0
    info = read_keyvals(out / "final_branch.txt")
    # |w|^2 = 2/3 against kappa = 1: constant root 0.5
    assert float(info["ell_bar_star_prime"]) == pytest.approx(0.5, abs=1e-2)
    branch = read_csv(out / "branch.csv")
    assert np.all(np.diff(branch["t"]) > 0)


def test_check_admissible_pass_and_fail(tmp_path):
    code, out = run(tmp_path, EXPANSION, "check-admissible")
    assert code == 0
    code, out = run(tmp_path, BAD_TARGET, "check-admissible")
    assert code == 1
    rows = (out / "admissibility.csv").read_text().splitlines()
    damping = [r for r in rows if r.startswith("damping_bound")][0]
    assert "false" in damping
    assert float(damping.split(",")[2]) == pytest.approx(2.0, abs=1e-9)


def test_synthesize_zero_to_zero_static_match(tmp_path):
    code, out = run(tmp_path, STATIC_ZERO, "synthesize")
    assert code == 0
    plan = read_keyvals(out / "plan.txt")
    assert plan["case"] == "static_match"


def test_synthesize_expansion_records_v(tmp_path):
    code, out = run(tmp_path, EXPANSION, "synthesize")
    assert code == 0
    plan = read_keyvals(out / "plan.txt")
    assert float(plan["v"]) == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert (out / "control.csv").exists() and (out / "branch.csv").exists()


def test_synthesize_boundary_time_exit_4(tmp_path):
    doc = EXPANSION.replace("T: 6.0", "T: 4.0")
    code, _ = run(tmp_path, doc, "synthesize")
    assert code == 4


def test_synthesize_dead_end_exit_5(tmp_path):
    code, _ = run(tmp_path, BAD_TARGET, "synthesize")
    assert code == 5


def test_verify_zero_to_zero(tmp_path):
    code, out = run(tmp_path, STATIC_ZERO, "verify")
    assert code == 0
    rows = (out / "verify.csv").read_text().splitlines()
    assert rows[0] == "metric,value,tolerance,passed"
    for row in rows[1:]:
        assert float(row.split(",")[1]) <= 1e-10


def test_verify_expansion(tmp_path):
    code, out = run(tmp_path, EXPANSION, "verify")
    assert code == 0
    front_row = (out / "verify.csv").read_text().splitlines()[1]
    assert float(front_row.split(",")[1]) <= 1e-2


def test_verify_corrupted_replay_exits_1(tmp_path):
    code, out = run(tmp_path, EXPANSION, "verify")
    assert code == 0
    control = (out / "control.csv").read_text().splitlines()
    header, rows = control[0], control[1:]
    corrupted = [header]
    for row in rows:  # scale the steering; u(0) = 0 stays compatible
        t, u, up = row.split(",")
        corrupted.append(f"{t},{1.25 * float(u)},{1.25 * float(up)}")
    bad = tmp_path / "bad_control.csv"
    bad.write_text("\n".join(corrupted) + "\n")
    cfg = tmp_path / "scenario.yaml"
    code = main([
        "verify", "--config", str(cfg), "--out", str(tmp_path / "out2"),
        "--control-csv", str(bad),
    ])
    assert code == 1
    rows = (tmp_path / "out2" / "verify.csv").read_text().splitlines()
    assert any("false" in r for r in rows[1:])


def test_config_roundtrip(tmp_path):
    cfg = parse_config(EXPANSION)
    text = emit_config(cfg)
    cfg2 = parse_config(text)
    assert emit_config(cfg2) == text
    a = cfg.build_target()
    b = cfg2.build_target()
    grid = np.linspace(0.0, 2.0, 101)
    assert np.max(np.abs(a.ybar0(grid) - b.ybar0(grid))) <= 1e-15
    assert np.max(np.abs(a.ybar1(grid) - b.ybar1(grid))) <= 1e-15
    assert cfg2.solver == cfg.solver and cfg2.T == cfg.T


def test_byte_identical_outputs(tmp_path):
    code1, out1 = run(tmp_path, CONSTANT_SPEED, "simulate")
    sub = tmp_path / "second"
    sub.mkdir()
    code2, out2 = run(sub, CONSTANT_SPEED, "simulate")
    assert code1 == code2 == 0
    for name in ("front.csv", "trace.csv", "control.csv", "state_at_T.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_h_override(tmp_path):
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(STATIC_ZERO)
    out = tmp_path / "o"
    code = main(["simulate", "--config", str(cfg), "--out", str(out), "--h", "0.01"])
    assert code == 0
    front = read_csv(out / "front.csv")
    assert front["t"].size == 301
