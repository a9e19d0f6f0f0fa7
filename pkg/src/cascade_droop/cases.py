"""The five built-in demonstration cases and their machine-checkable claims.

Each case is a deterministic scenario plus a list of checks with pinned
tolerances; running one writes a trace CSV and a plain-text report with one
``CHECK <name> <pass|fail> measured=<v> tol=<t>`` line per check.

Parameter choices that the qualitative claims do not pin down (loads,
pre-switch conditions, and the gain/sizing of the tight-settling cases) are
artifact defaults; every report lists the exact values used, and the
module-level constants below carry the reasoning:

* ``V_STAR_MATCHED`` sizes the string voltage to the grid exactly.  At that
  sizing the synchronized string can only realize power factor angles in a
  half-turn arc around the line angle, so the cases that must reach an
  arbitrary reference (4 and 5) instead run the string at 30 % of the grid
  voltage, where every reference angle has a unique, always-stable
  operating point.
* ``M_FAST`` raises the droop gain for cases 3 and 5.  Angle disagreements
  contract at exactly the gain, so the pinned settling tolerances inside
  the 5-second windows need a faster loop than the baseline gain of 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .droop import DroopParams
from .engine import (
    Mode,
    Scenario,
    SetInitialDelta,
    SetLine,
    SetLoad,
    SetMode,
    SetPfRef,
    SystemConfig,
    TimedEvent,
    Trace,
    grid_equilibrium,
    islanded_equilibrium,
    simulate,
)
from .errors import ValidationError
from .phasors import Impedance, wrap_angle
from .reports import SweepAxis, emit_trace_csv, report_stability

PI = math.pi

N_MODULES = 4
F_STAR = 50.0
V_GRID = 315.0
V_STAR_MATCHED = 315.0 / 4.0
V_STAR_REDUCED = 0.3 * V_GRID / N_MODULES
M_NOMINAL = 0.5
M_FAST = 6.0
PHI_STAR = 0.2
CLAMP = (49.0, 51.0)

LINE_INDUCTIVE = Impedance(0.314, PI / 2)
LINE_RESISTIVE = Impedance(0.314, 0.0)
LINE_CAPACITIVE = Impedance(0.314, -PI / 2)
LOAD_R = Impedance.from_rect(12.0, 0.0)
LOAD_RL = Impedance.from_rect(12.0, 6.0)
LOAD_RC = Impedance.from_rect(12.0, -6.0)

QUADRANT_ANGLES = (PI / 4, 3 * PI / 4, -3 * PI / 4, -PI / 4)

_CASE4_SWEEP = (SweepAxis(-PI, PI, PI / 12), None)

CASE_TITLES = {
    1: "unified control across a grid-to-island transition",
    2: "islanded operation under resistive, inductive and capacitive loads",
    3: "unique equilibrium from four starting quadrants",
    4: "grid-tied operation over capacitive, inductive and resistive lines",
    5: "four-quadrant power-factor-angle reference steps",
}


@dataclass(frozen=True)
class CheckResult:
    """One acceptance check: ``measured`` compared against ``tol``."""

    name: str
    passed: bool
    measured: float
    tol: float

    def line(self) -> str:
        word = "pass" if self.passed else "fail"
        return f"CHECK {self.name} {word} measured={self.measured:.6g} tol={self.tol:.6g}"


@dataclass(frozen=True)
class CaseReport:
    case_id: int
    title: str
    parameter_lines: tuple[str, ...]
    note_lines: tuple[str, ...]
    checks: tuple[CheckResult, ...]
    trace_path: Path

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"case {self.case_id}: {self.title}"]
        lines += list(self.parameter_lines)
        lines += [f"note: {n}" for n in self.note_lines]
        lines.append(f"trace: {self.trace_path.name}")
        lines += [c.line() for c in self.checks]
        return "\n".join(lines) + "\n"


def _droop(m: float, v_star: float, phi_star: float = PHI_STAR) -> DroopParams:
    return DroopParams(
        nominal_omega=math.tau * F_STAR,
        nominal_voltage=v_star,
        nominal_pf_angle=phi_star,
        droop_gain=m,
        freq_clamp=CLAMP,
    )


def _params_lines(scenario: Scenario) -> tuple[str, ...]:
    c = scenario.config
    d = c.droop
    clamp = "off" if d.freq_clamp is None else f"[{d.freq_clamp[0]:g}, {d.freq_clamp[1]:g}]"
    return (
        f"parameters: n={c.n} f_star={F_STAR:g} v_star={d.nominal_voltage:.9g} "
        f"v_grid={c.grid_voltage:.9g} m={d.droop_gain:.9g} phi_star={d.nominal_pf_angle:.9g} "
        f"clamp={clamp} mode={c.mode.value} dt={scenario.dt:.9g} duration={scenario.duration:.9g}",
        f"line: mag={c.line.magnitude:.9g} theta={c.line.angle:.9g}",
        f"load: mag={c.load.magnitude:.9g} theta={c.load.angle:.9g}",
        "initial deltas: " + ", ".join(f"{x:.9g}" for x in scenario.initial_deltas),
    )


def _sample_index_before(trace: Trace, t: float) -> int:
    idx = int(np.searchsorted(trace.times, t - 1e-12)) - 1
    if idx < 0:
        raise ValidationError(f"no trace sample before t={t}")
    return idx


def _sample_index_at(trace: Trace, t: float) -> int:
    idx = int(np.argmin(np.abs(trace.times - t)))
    return idx


def _max_pairwise_wrapped(values) -> float:
    worst = 0.0
    vals = list(values)
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            worst = max(worst, abs(wrap_angle(vals[i] - vals[j])))
    return worst


def _relative_spread(values) -> float:
    arr = np.asarray(values, dtype=float)
    center = np.mean(np.abs(arr))
    if center == 0.0:
        return float(np.max(arr) - np.min(arr))
    return float((np.max(arr) - np.min(arr)) / center)


# --- case builders ----------------------------------------------------------


def build_case(case_id: int) -> tuple[Scenario, tuple[str, ...]]:
    """The scenario and the artifact-choice notes for one built-in case."""
    if case_id == 1:
        config = SystemConfig(
            n=N_MODULES,
            droop=_droop(M_NOMINAL, V_STAR_MATCHED),
            grid_voltage=V_GRID,
            grid_angle=0.0,
            line=LINE_INDUCTIVE,
            load=LOAD_R,
            mode=Mode.GRID_CONNECTED,
        )
        delta_s = grid_equilibrium(config).delta_s
        scenario = Scenario(
            config=config,
            initial_deltas=tuple(delta_s + off for off in (0.15, 0.05, -0.05, -0.15)),
            events=(TimedEvent(2.0, SetMode(Mode.ISLANDED)),),
            duration=10.0,
            dt=1e-3,
            record_decimation=10,
        )
        notes = (
            "pre-switch state is the grid-tied operating point plus a deterministic angle spread",
            "the island inherits the 12 ohm resistive load in series with the line (artifact default)",
        )
        return scenario, notes

    if case_id == 2:
        config = SystemConfig(
            n=N_MODULES,
            droop=_droop(M_NOMINAL, V_STAR_MATCHED),
            grid_voltage=V_GRID,
            grid_angle=0.0,
            line=LINE_INDUCTIVE,
            load=LOAD_R,
            mode=Mode.ISLANDED,
        )
        scenario = Scenario(
            config=config,
            initial_deltas=(0.1, 0.05, -0.05, -0.1),
            events=(
                TimedEvent(6.0, SetLoad(LOAD_RL)),
                TimedEvent(12.0, SetLoad(LOAD_RC)),
            ),
            duration=18.0,
            dt=1e-3,
            record_decimation=10,
        )
        notes = (
            "load values 12, 12+j6 and 12-j6 ohm keep the three intervals at comparable current "
            "(artifact defaults)",
        )
        return scenario, notes

    if case_id == 3:
        config = SystemConfig(
            n=N_MODULES,
            droop=_droop(M_FAST, V_STAR_MATCHED),
            grid_voltage=V_GRID,
            grid_angle=0.0,
            line=LINE_INDUCTIVE,
            load=LOAD_R,
            mode=Mode.ISLANDED,
        )
        events = []
        for k, start in enumerate((5.0, 10.0, 15.0), start=1):
            events.append(TimedEvent(start, SetInitialDelta(1, QUADRANT_ANGLES[k])))
            for idx in range(2, N_MODULES + 1):
                events.append(TimedEvent(start, SetInitialDelta(idx, 0.0)))
        scenario = Scenario(
            config=config,
            initial_deltas=(QUADRANT_ANGLES[0], 0.0, 0.0, 0.0),
            events=tuple(events),
            duration=20.0,
            dt=1e-3,
            record_decimation=10,
        )
        notes = (
            "module 1 is re-aimed into each quadrant at 5 s intervals while the rest restart at 0",
            f"droop gain raised to {M_FAST:g} (baseline 0.5): disagreements contract at exactly the "
            "gain, and the settling tolerances must be met inside each 5 s window",
        )
        return scenario, notes

    if case_id == 4:
        config = SystemConfig(
            n=N_MODULES,
            droop=_droop(M_NOMINAL, V_STAR_REDUCED),
            grid_voltage=V_GRID,
            grid_angle=0.0,
            line=LINE_CAPACITIVE,
            load=LOAD_R,
            mode=Mode.GRID_CONNECTED,
        )
        scenario = Scenario(
            config=config,
            initial_deltas=(0.05, 0.02, -0.02, -0.05),
            events=(
                TimedEvent(50.0, SetLine(LINE_INDUCTIVE)),
                TimedEvent(100.0, SetLine(LINE_RESISTIVE)),
            ),
            duration=150.0,
            dt=2e-3,
            record_decimation=10,
        )
        notes = (
            "line is capacitive, then inductive, then resistive, all at 0.314 ohm magnitude",
            f"string sized at v_star={V_STAR_REDUCED:.9g} (30% of the grid voltage): with the "
            "string matched to the grid the reference angle is unreachable on a capacitive line",
            "segments are 50 s: the slow mode decays at about m/(1+r) with r the voltage ratio",
        )
        return scenario, notes

    if case_id == 5:
        config = SystemConfig(
            n=N_MODULES,
            droop=_droop(M_FAST, V_STAR_REDUCED, phi_star=QUADRANT_ANGLES[0]),
            grid_voltage=V_GRID,
            grid_angle=0.0,
            line=LINE_INDUCTIVE,
            load=LOAD_R,
            mode=Mode.GRID_CONNECTED,
        )
        scenario = Scenario(
            config=config,
            initial_deltas=(0.05, 0.02, -0.02, -0.05),
            events=(
                TimedEvent(5.0, SetPfRef(QUADRANT_ANGLES[1])),
                TimedEvent(10.0, SetPfRef(QUADRANT_ANGLES[2])),
                TimedEvent(15.0, SetPfRef(QUADRANT_ANGLES[3])),
            ),
            duration=20.0,
            dt=1e-3,
            record_decimation=10,
        )
        notes = (
            "reference steps through all four quadrants, crossing the +/-pi seam on the short path",
            f"string sized at v_star={V_STAR_REDUCED:.9g} and gain raised to {M_FAST:g}: matched "
            "sizing cannot reach quadrants III/IV, and the 3 s tracking deadline needs a loop "
            "faster than the baseline gain",
        )
        return scenario, notes

    raise ValidationError(f"case id must be 1..5, got {case_id!r}")


# --- per-case checks --------------------------------------------------------


def _checks_case1(scenario: Scenario, trace: Trace, continuity_max: float) -> list[CheckResult]:
    f = trace.frequency_hz
    excursion = max(0.0, CLAMP[0] - float(f.min()), float(f.max()) - CLAMP[1])
    post = trace.times >= 7.0 - 1e-12
    p_post = trace.active[post]
    spread = float(np.max(
        (p_post.max(axis=1) - p_post.min(axis=1)) / np.abs(p_post.mean(axis=1))
    ))
    island = islanded_equilibrium(replace(scenario.config, mode=Mode.ISLANDED))
    f_err = abs(float(f[-1].mean()) - island.frequency_hz)
    return [
        CheckResult("delta-continuity-at-switch", continuity_max <= 0.0, continuity_max, 0.0),
        CheckResult("frequency-within-clamp-band", excursion <= 0.0, excursion, 0.0),
        CheckResult("active-power-equalized-within-5s", spread < 1e-3, spread, 1e-3),
        CheckResult("final-frequency-matches-closed-form", f_err < 1e-3, f_err, 1e-3),
    ]


def _checks_case2(scenario: Scenario, trace: Trace) -> list[CheckResult]:
    marks = {
        "resistive": (_sample_index_before(trace, 6.0), LOAD_R),
        "inductive": (_sample_index_before(trace, 12.0), LOAD_RL),
        "capacitive": (len(trace) - 1, LOAD_RC),
    }
    out = []
    freqs = {}
    powers = {}
    for label, (idx, load) in marks.items():
        island = islanded_equilibrium(replace(scenario.config, load=load, mode=Mode.ISLANDED))
        f_meas = float(trace.frequency_hz[idx].mean())
        freqs[label] = f_meas
        powers[label] = (float(trace.active[idx].mean()), float(trace.reactive[idx].mean()))
        err = abs(f_meas - island.frequency_hz)
        out.append(CheckResult(f"steady-frequency-{label}", err < 1e-4, err, 1e-4))
    margin = min(freqs["capacitive"] - freqs["resistive"], freqs["resistive"] - freqs["inductive"])
    out.append(CheckResult("frequency-ordering-rc-above-r-above-rl", margin > 0.0, margin, 0.0))
    p_r, q_r = powers["resistive"]
    ratio = abs(q_r / p_r)
    out.append(CheckResult(
        "reactive-small-positive-resistive", q_r > 0.0 and ratio <= 0.05, ratio, 0.05
    ))
    out.append(CheckResult(
        "reactive-positive-inductive", powers["inductive"][1] > 0.0, powers["inductive"][1], 0.0
    ))
    out.append(CheckResult(
        "reactive-negative-capacitive", powers["capacitive"][1] < 0.0, powers["capacitive"][1], 0.0
    ))
    return out


def _checks_case3(scenario: Scenario, trace: Trace) -> list[CheckResult]:
    marks = [
        _sample_index_before(trace, 5.0),
        _sample_index_before(trace, 10.0),
        _sample_index_before(trace, 15.0),
        len(trace) - 1,
    ]
    sync = max(_max_pairwise_wrapped(trace.pf_angle[idx]) for idx in marks)
    p_means = [float(trace.active[idx].mean()) for idx in marks]
    q_means = [float(trace.reactive[idx].mean()) for idx in marks]
    f_means = [float(trace.frequency_hz[idx].mean()) for idx in marks]
    return [
        CheckResult("modules-resynchronize-each-quadrant", sync < 1e-8, sync, 1e-8),
        CheckResult(
            "active-power-identical-across-quadrants",
            _relative_spread(p_means) < 1e-6, _relative_spread(p_means), 1e-6,
        ),
        CheckResult(
            "reactive-power-identical-across-quadrants",
            _relative_spread(q_means) < 1e-6, _relative_spread(q_means), 1e-6,
        ),
        CheckResult(
            "frequency-identical-across-quadrants",
            _relative_spread(f_means) < 1e-6, _relative_spread(f_means), 1e-6,
        ),
    ]


def _checks_case4(scenario: Scenario, trace: Trace) -> list[CheckResult]:
    marks = [
        _sample_index_before(trace, 50.0),
        _sample_index_before(trace, 100.0),
        len(trace) - 1,
    ]
    phi_star = scenario.config.droop.nominal_pf_angle
    f_err = max(abs(float(trace.frequency_hz[idx].mean()) - F_STAR) for idx in marks)
    phi_err = max(
        max(abs(wrap_angle(v - phi_star)) for v in trace.pf_angle[idx]) for idx in marks
    )
    reports = {
        report_stability(replace(scenario.config, line=line), sweep=_CASE4_SWEEP)
        for line in (LINE_CAPACITIVE, LINE_INDUCTIVE, LINE_RESISTIVE)
    }
    distinct = float(len(reports) - 1)
    return [
        CheckResult("frequency-locks-to-grid-all-lines", f_err < 1e-4, f_err, 1e-4),
        CheckResult("pf-angle-tracks-reference-all-lines", phi_err < 1e-6, phi_err, 1e-6),
        CheckResult("stability-report-line-independent", distinct == 0.0, distinct, 0.0),
    ]


def _checks_case5(scenario: Scenario, trace: Trace) -> list[CheckResult]:
    track_err = 0.0
    for seg, phi_star in enumerate(QUADRANT_ANGLES):
        idx = _sample_index_at(trace, 5.0 * seg + 3.0)
        track_err = max(
            track_err, max(abs(wrap_angle(v - phi_star)) for v in trace.pf_angle[idx])
        )
    marks = [
        _sample_index_before(trace, 5.0),
        _sample_index_before(trace, 10.0),
        _sample_index_before(trace, 15.0),
        len(trace) - 1,
    ]
    f_err = max(abs(float(trace.frequency_hz[idx].mean()) - F_STAR) for idx in marks)
    return [
        CheckResult("pf-angle-tracks-within-3s", track_err < 1e-4, track_err, 1e-4),
        CheckResult("frequency-returns-to-nominal", f_err < 1e-4, f_err, 1e-4),
    ]


_CHECKERS = {2: _checks_case2, 3: _checks_case3, 4: _checks_case4, 5: _checks_case5}


def run_case(case_id: int, out_dir) -> CaseReport:
    """Execute one built-in case: simulate, check, and write trace + report files."""
    scenario, notes = build_case(case_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    continuity = 0.0

    def watch(_t, action, before, after):
        nonlocal continuity
        if not isinstance(action, SetInitialDelta):
            continuity = max(continuity, max(abs(b - a) for b, a in zip(before, after)))

    trace = simulate(scenario, on_event=watch).trace
    if case_id == 1:
        checks = _checks_case1(scenario, trace, continuity)
    else:
        checks = _CHECKERS[case_id](scenario, trace)

    trace_path = emit_trace_csv(trace, out_dir / f"case{case_id}.csv")
    report = CaseReport(
        case_id=case_id,
        title=CASE_TITLES[case_id],
        parameter_lines=_params_lines(scenario),
        note_lines=notes,
        checks=tuple(checks),
        trace_path=trace_path,
    )
    (out_dir / f"case{case_id}_report.txt").write_text(
        report.render(), encoding="utf-8", newline="\n"
    )
    return report
