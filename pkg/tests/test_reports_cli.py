"""Trace CSV emission, stability reports, and the command-line surface."""

import math
import subprocess
import sys

import numpy as np
import pytest

from cascade_droop import (
    DroopParams,
    EmptyTraceError,
    Impedance,
    Mode,
    Scenario,
    SweepAxis,
    SystemConfig,
    Trace,
    emit_trace_csv,
    report_stability,
    run_scenario,
)
from cascade_droop.cases import run_case

PI = math.pi
TAU = math.tau

SCENARIO_TEXT = """
[system]
n = 2
f_star = 50
v_star = 50
v_grid = 100
phi_star = 0.2
m = 0.5
mode = islanded

[line]
mag = 0.314
theta = 1.5707963267948966

[load]
r = 12

[initial]
delta = 0.2, -0.2

[solver]
duration = 2
"""


def small_trace(samples=3, modules=2):
    config = SystemConfig(
        n=modules,
        droop=DroopParams(TAU * 50.0, 50.0, 0.2, 0.5, (49.0, 51.0)),
        grid_voltage=100.0,
        grid_angle=0.0,
        line=Impedance(0.314, PI / 2),
        load=Impedance.from_rect(12.0, 0.0),
        mode=Mode.ISLANDED,
    )
    scenario = Scenario(
        config=config,
        initial_deltas=tuple(0.05 * k for k in range(modules)),
        duration=(samples - 1) * 1e-2,
        dt=1e-2,
        record_decimation=1,
    )
    return run_scenario(scenario)


def test_csv_shape_and_rows(tmp_path):
    trace = small_trace(samples=3, modules=2)
    path = emit_trace_csv(trace, tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 4  # header + 3 samples
    assert lines[0] == "time,f1,f2,P1,P2,Q1,Q2,phi1,phi2"
    assert all(len(line.split(",")) == 9 for line in lines)


def test_csv_byte_deterministic(tmp_path):
    trace = small_trace()
    a = emit_trace_csv(trace, tmp_path / "a.csv").read_bytes()
    b = emit_trace_csv(trace, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_csv_refuses_empty_trace(tmp_path):
    empty = Trace(
        times=np.empty(0),
        frequency_hz=np.empty((0, 2)),
        active=np.empty((0, 2)),
        reactive=np.empty((0, 2)),
        pf_angle=np.empty((0, 2)),
    )
    with pytest.raises(EmptyTraceError):
        emit_trace_csv(empty, tmp_path / "empty.csv")


def _grid_config(line):
    return SystemConfig(
        n=4,
        droop=DroopParams(TAU * 50.0, 23.625, 0.2, 0.5, (49.0, 51.0)),
        grid_voltage=315.0,
        grid_angle=0.0,
        line=line,
        load=Impedance.from_rect(12.0, 0.0),
        mode=Mode.GRID_CONNECTED,
    )


def test_stability_report_line_independent():
    sweep = (SweepAxis(-PI, PI, PI / 6), None)
    texts = {
        report_stability(_grid_config(line), sweep=sweep)
        for line in (Impedance(0.314, PI / 2), Impedance(0.314, 0.0), Impedance(7.0, -1.2))
    }
    assert len(texts) == 1


def test_stability_report_point_and_sweep_content():
    report = report_stability(_grid_config(Impedance(0.314, PI / 2)), angle_diff=PI / 2)
    assert "verdict=stable" in report
    # matched sizing at zero angle: the exact zero-current point is marked degenerate
    config = SystemConfig(
        n=4,
        droop=DroopParams(TAU * 50.0, 78.75, 0.2, 0.5, (49.0, 51.0)),
        grid_voltage=315.0,
        grid_angle=0.0,
        line=Impedance(0.314, PI / 2),
        load=Impedance.from_rect(12.0, 0.0),
        mode=Mode.GRID_CONNECTED,
    )
    assert "degenerate" in report_stability(config, angle_diff=0.0)
    # a sweep cell constructed to null the stability margin reads marginal
    dd = PI / 4
    v_null = 315.0 / (4 * math.cos(dd))
    sweep = (SweepAxis(dd, dd, 1.0), SweepAxis(v_null, v_null, 1.0))
    assert "verdict=marginal" in report_stability(config, sweep=sweep)


def test_sweep_axis_parsing():
    axis = SweepAxis.parse("-1:1:0.5")
    assert axis.points() == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
    with pytest.raises(Exception):
        SweepAxis.parse("1:2")


def test_case1_smoke(tmp_path):
    report = run_case(1, tmp_path)
    assert report.all_passed
    assert (tmp_path / "case1.csv").exists()
    text = (tmp_path / "case1_report.txt").read_text()
    assert text.count("CHECK ") == len(report.checks)
    assert "pass" in text


# --- CLI ------------------------------------------------------------------------


def _cli(*args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "cascade_droop", *args],
        capture_output=True, text=True, cwd=cwd,
    )


def test_cli_simulate_writes_trace(tmp_path):
    scenario = tmp_path / "demo.scn"
    scenario.write_text(SCENARIO_TEXT)
    proc = _cli("simulate", "demo.scn", "--out", "out", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "out" / "demo_trace.csv").exists()
    assert "final frequencies" in proc.stdout


def test_cli_simulate_overrides(tmp_path):
    scenario = tmp_path / "demo.scn"
    scenario.write_text(SCENARIO_TEXT)
    proc = _cli("simulate", "demo.scn", "--out", "o", "--dt", "0.002",
                "--duration", "1", "--no-clamp", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    header, first, *_rest, last = (tmp_path / "o" / "demo_trace.csv").read_text().splitlines()
    assert last.split(",")[0] == "1"


def test_cli_exit_code_validation_error(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text(SCENARIO_TEXT.replace("m = 0.5", "m = -2"))
    proc = _cli("simulate", "bad.scn", cwd=tmp_path)
    assert proc.returncode == 1
    assert "droop_gain" in proc.stderr
    proc = _cli("simulate", "missing.scn", cwd=tmp_path)
    assert proc.returncode == 1
    proc = _cli("bogus-command", cwd=tmp_path)
    assert proc.returncode == 1


def test_cli_exit_code_runtime_error(tmp_path):
    # series LC cancellation scheduled mid-run: the circuit becomes singular
    text = SCENARIO_TEXT + "\n[events]\n1.0 load mag=0.314 theta=-1.5707963267948966\n"
    scn = tmp_path / "singular.scn"
    scn.write_text(text)
    proc = _cli("simulate", "singular.scn", cwd=tmp_path)
    assert proc.returncode == 2
    assert "runtime error" in proc.stderr


def test_cli_case_all(tmp_path):
    proc = _cli("case", "all", "--out", "cases", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    for k in range(1, 6):
        assert f"case {k}:" in proc.stdout
        assert (tmp_path / "cases" / f"case{k}.csv").exists()
        assert (tmp_path / "cases" / f"case{k}_report.txt").exists()
    assert "fail" not in proc.stdout


def test_cli_case_and_stability(tmp_path):
    proc = _cli("case", "1", "--out", "cases", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert "case 1:" in proc.stdout
    assert (tmp_path / "cases" / "case1_report.txt").exists()

    scenario = tmp_path / "demo.scn"
    scenario.write_text(SCENARIO_TEXT.replace("mode = islanded", "mode = grid"))
    proc = _cli("stability", "demo.scn", "--angle", "1.0", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert "verdict=" in proc.stdout
    proc = _cli("stability", "demo.scn", "--sweep", "angle=-3:3:1", "vstar=10:40:10",
                cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("angle_diff=") >= 28


def test_cli_invocations_are_byte_deterministic(tmp_path):
    scenario = tmp_path / "demo.scn"
    scenario.write_text(SCENARIO_TEXT)
    for out in ("r1", "r2"):
        proc = _cli("simulate", "demo.scn", "--out", out, cwd=tmp_path)
        assert proc.returncode == 0, proc.stderr
    a = (tmp_path / "r1" / "demo_trace.csv").read_bytes()
    b = (tmp_path / "r2" / "demo_trace.csv").read_bytes()
    assert a == b
