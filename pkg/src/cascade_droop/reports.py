"""Serialization of traces and stability reports.

Both outputs are byte-deterministic for identical inputs: numbers are
printed with 9 significant digits (below solver tolerance, above the noise
a diff would amplify), rows are newline-terminated, and nothing
time-of-day-dependent is ever written.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .engine import SystemConfig, Trace
from .errors import DegeneratePointError, EmptyTraceError, ValidationError
from .linearization import grid_ab, grid_jacobian


def _num(x: float) -> str:
    return format(x, ".9g")


def emit_trace_csv(trace: Trace, path) -> Path:
    """Write a trace as CSV: ``time,f1..fn,P1..Pn,Q1..Qn,phi1..phin``."""
    if len(trace) == 0:
        raise EmptyTraceError("refusing to write an empty trace")
    n = trace.module_count
    header = (
        "time,"
        + ",".join(f"f{i}" for i in range(1, n + 1)) + ","
        + ",".join(f"P{i}" for i in range(1, n + 1)) + ","
        + ",".join(f"Q{i}" for i in range(1, n + 1)) + ","
        + ",".join(f"phi{i}" for i in range(1, n + 1))
    )
    lines = [header]
    for k in range(len(trace)):
        row = [_num(trace.times[k])]
        row += [_num(v) for v in trace.frequency_hz[k]]
        row += [_num(v) for v in trace.active[k]]
        row += [_num(v) for v in trace.reactive[k]]
        row += [_num(v) for v in trace.pf_angle[k]]
        lines.append(",".join(row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


@dataclass(frozen=True)
class SweepAxis:
    """A closed numeric range ``lo:hi:step`` for stability sweeps."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ValidationError(f"sweep step must be > 0, got {self.step}")
        if self.hi < self.lo:
            raise ValidationError(f"sweep range [{self.lo}, {self.hi}] is empty")

    def points(self) -> list[float]:
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return [self.lo + k * self.step for k in range(count)]

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"sweep axis must be 'lo:hi:step', got {text!r}")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ValidationError(f"sweep axis has a non-numeric bound: {text!r}") from None
        return cls(lo, hi, step)


def _verdict_row(n: int, v_star: float, v_g: float, m: float, angle: float) -> str:
    try:
        lin = grid_ab(n, v_star, v_g, angle)
    except DegeneratePointError:
        return "degenerate"
    except ValidationError:
        return "invalid"
    model = grid_jacobian(lin, n, m)
    lam1 = -m * (lin.a + (n - 1) * lin.b)
    return f"lambda1={_num(lam1)} verdict={model.stable.value}"


def report_stability(
    config: SystemConfig,
    sweep: tuple[SweepAxis | None, SweepAxis | None] | None = None,
    angle_diff: float = 0.0,
) -> str:
    """Plain-text stability report for the grid-connected linearization.

    The verdict depends only on the module count, the voltage sizing and
    the string-to-grid angle; the line impedance carried by ``config`` is
    accepted and deliberately absent from every row, so configurations that
    differ only in their line produce identical reports.

    With ``sweep`` given as (angle_axis, vstar_axis) the report tabulates
    the verdict over the grid of both axes (either may be None to keep the
    single configured value).  Degenerate points are marked, not fatal.
    """
    d = config.droop
    n = config.n
    m = d.droop_gain
    lines = [
        "stability report (grid-connected linearization)",
        f"n={n} v_star={_num(d.nominal_voltage)} v_grid={_num(config.grid_voltage)} m={_num(m)}",
        f"fast modes: lambda_2..n = {_num(-m)} (multiplicity {n - 1})",
    ]
    if sweep is None:
        lines.append(
            f"point angle_diff={_num(angle_diff)}: "
            + _verdict_row(n, d.nominal_voltage, config.grid_voltage, m, angle_diff)
        )
    else:
        angle_axis, vstar_axis = sweep
        angles = angle_axis.points() if angle_axis is not None else [angle_diff]
        vstars = vstar_axis.points() if vstar_axis is not None else [d.nominal_voltage]
        lines.append(f"sweep rows: {len(angles) * len(vstars)}")
        for v_star in vstars:
            for angle in angles:
                lines.append(
                    f"angle_diff={_num(angle)} v_star={_num(v_star)}: "
                    + _verdict_row(n, v_star, config.grid_voltage, m, angle)
                )
    return "\n".join(lines) + "\n"
