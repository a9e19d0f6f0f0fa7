"""Scenario text format: parsing, validation messages, round-trips."""

import math

import pytest

from cascade_droop import (
    Mode,
    ScenarioParseError,
    SetInitialDelta,
    SetLoad,
    SetMode,
    SetPfRef,
    parse_scenario,
    serialize_scenario,
)

PI = math.pi

BASELINE = """
# four modules tied to a stiff grid through an inductive line
[system]
n = 4
f_star = 50
v_star = 78.75
v_grid = 315
phi_star = 0.2
m = 0.5
mode = grid

[line]
mag = 0.314
theta = 1.5707963267948966

[load]
r = 12

[initial]
delta = 0.1, 0.05, -0.05, -0.1

[events]
2.0 mode islanded
6.0 load r=12 x=6
8.0 phi_star 0.75
9.0 delta 1 0.7853981633974483

[solver]
duration = 10
"""


def test_parse_baseline_fields():
    sc = parse_scenario(BASELINE)
    c = sc.config
    assert c.n == 4
    assert c.grid_voltage == 315.0
    assert c.droop.nominal_voltage == 78.75
    assert c.droop.droop_gain == 0.5
    assert c.droop.nominal_pf_angle == 0.2
    assert c.droop.nominal_omega == pytest.approx(math.tau * 50.0)
    assert c.mode is Mode.GRID_CONNECTED
    assert c.line.magnitude == 0.314
    assert c.line.angle == pytest.approx(PI / 2)
    assert c.load.magnitude == pytest.approx(12.0)
    assert sc.initial_deltas == (0.1, 0.05, -0.05, -0.1)
    # defaults
    assert sc.dt == 1e-3
    assert sc.record_decimation == 10
    assert c.droop.freq_clamp == (49.0, 51.0)
    # events
    kinds = [type(ev.action) for ev in sc.events]
    assert kinds == [SetMode, SetLoad, SetPfRef, SetInitialDelta]
    assert sc.events[1].action.load.magnitude == pytest.approx(math.hypot(12.0, 6.0))


def test_clamp_off_and_solver_overrides():
    text = BASELINE.replace("m = 0.5", "m = 0.5\nclamp = off").replace(
        "duration = 10", "duration = 12\ndt = 0.002\ndecimation = 4"
    )
    sc = parse_scenario(text)
    assert sc.config.droop.freq_clamp is None
    assert sc.dt == 0.002
    assert sc.record_decimation == 4
    assert sc.duration == 12.0


def test_load_from_inductance_and_capacitance():
    # reactances evaluated at f_star: x = w*l - 1/(w*c)
    w = math.tau * 50.0
    l = 6.0 / w
    text = BASELINE.replace("r = 12", f"r = 12\nl = {l!r}")
    sc = parse_scenario(text)
    assert sc.config.load.reactance == pytest.approx(6.0, rel=1e-12)
    c = 1.0 / (w * 5.0)
    text = BASELINE.replace("r = 12", f"r = 12\nc = {c!r}")
    sc = parse_scenario(text)
    assert sc.config.load.reactance == pytest.approx(-5.0, rel=1e-12)


def test_negative_gain_rejected_with_field_name():
    text = BASELINE.replace("m = 0.5", "m = -1")
    with pytest.raises(ScenarioParseError, match="droop_gain"):
        parse_scenario(text)


def test_unknown_key_reports_line_number():
    text = BASELINE.replace("m = 0.5", "m = 0.5\nfrobnicate = 1")
    with pytest.raises(ScenarioParseError, match="line 10") as err:
        parse_scenario(text)
    assert "frobnicate" in str(err.value)


def test_unknown_section_and_event_kind():
    with pytest.raises(ScenarioParseError, match="unknown section"):
        parse_scenario(BASELINE + "\n[extras]\nx = 1\n")
    with pytest.raises(ScenarioParseError, match="unknown event kind"):
        parse_scenario(BASELINE.replace("8.0 phi_star 0.75", "8.0 wobble 0.75"))


def test_missing_required_bits():
    with pytest.raises(ScenarioParseError, match=r"\[solver\]"):
        parse_scenario(BASELINE.replace("[solver]\nduration = 10", ""))
    with pytest.raises(ScenarioParseError, match="duration"):
        parse_scenario(BASELINE.replace("duration = 10", "dt = 0.001"))
    with pytest.raises(ScenarioParseError, match="mode"):
        parse_scenario(BASELINE.replace("mode = grid\n", ""))


def test_initial_length_mismatch():
    text = BASELINE.replace("delta = 0.1, 0.05, -0.05, -0.1", "delta = 0.1, 0.2")
    with pytest.raises(ScenarioParseError, match="n=4"):
        parse_scenario(text)


def test_mixed_polar_and_rect_impedance_rejected():
    text = BASELINE.replace("mag = 0.314", "mag = 0.314\nr = 1")
    with pytest.raises(ScenarioParseError, match="polar form"):
        parse_scenario(text)


def test_round_trip_is_stable():
    sc = parse_scenario(BASELINE)
    text = serialize_scenario(sc)
    again = parse_scenario(text)
    assert again == sc
    assert serialize_scenario(again) == text


def test_round_trip_all_builtin_cases():
    from cascade_droop.cases import build_case

    for case_id in range(1, 6):
        scenario, _notes = build_case(case_id)
        text = serialize_scenario(scenario)
        assert parse_scenario(text) == scenario
