"""Closed-loop time simulation of the droop-controlled series string.

State per module is the phase angle delta_i, kept in a frame rotating at the
nominal frequency; the grid, when connected, sits at a fixed angle in that
frame (it runs at exactly nominal frequency).  Each integrator stage solves
the quasi-static circuit at the current angles, measures per-module power,
applies the droop law and advances

    d(delta_i)/dt = omega_i - omega_star.

Integration is fixed-step classical Runge-Kutta (RK4).  The closed-loop
rates are of order the droop gain, so the default 1 ms step is deeply
conservative; fixed stepping keeps every run bit-reproducible.

A scenario is a timeline of parameter/topology events applied atomically at
exact step boundaries (event times must be multiples of dt).  Angles are
never touched by mode, load, line or reference events; only the explicit
angle-reset event writes them.

At (essentially) zero apparent power the power factor angle is undefined;
the engine holds each module's previous valid measurement, initialized to
the reference angle, so a dead start is well defined.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Union

import numpy as np

from . import linearization
from .droop import DroopParams
from .errors import NoRootError, SingularImpedanceError, ValidationError
from .phasors import Impedance, PowerPair, generalized_load, wrap_angle

TAU = math.tau
PI = math.pi

# |S| below this fraction of the string's natural power scale counts as
# zero power for the measurement-hold rule.
_ZERO_POWER_FRACTION = 1e-12


class Mode(Enum):
    ISLANDED = "islanded"
    GRID_CONNECTED = "grid"


@dataclass
class InverterState:
    """Dynamic state of one module; ``pf_angle`` is the last valid measurement."""

    delta: float
    voltage: float
    power: PowerPair
    pf_angle: float
    omega: float


@dataclass(frozen=True)
class SystemConfig:
    """Full plant description: controller constants, grid, line, load, topology."""

    n: int
    droop: DroopParams
    grid_voltage: float
    grid_angle: float
    line: Impedance
    load: Impedance
    mode: Mode

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValidationError(f"n must be an integer >= 1, got {self.n!r}")
        if not (math.isfinite(self.grid_voltage) and self.grid_voltage >= 0.0):
            raise ValidationError(f"grid_voltage must be >= 0, got {self.grid_voltage}")
        if not math.isfinite(self.grid_angle):
            raise ValidationError("grid_angle must be finite")
        object.__setattr__(self, "grid_angle", wrap_angle(self.grid_angle))

    def effective_impedance(self) -> Impedance:
        """The impedance the string currently drives: line+load islanded, line only on grid."""
        if self.mode is Mode.ISLANDED:
            return generalized_load(self.line, self.load)
        return self.line


# --- scenario events ------------------------------------------------------


@dataclass(frozen=True)
class SetMode:
    mode: Mode


@dataclass(frozen=True)
class SetLoad:
    load: Impedance


@dataclass(frozen=True)
class SetLine:
    line: Impedance


@dataclass(frozen=True)
class SetPfRef:
    pf_angle: float


@dataclass(frozen=True)
class SetInitialDelta:
    """Re-initialize one module's angle (1-based index). The only event that writes state."""

    index: int
    delta: float


EventAction = Union[SetMode, SetLoad, SetLine, SetPfRef, SetInitialDelta]


@dataclass(frozen=True)
class TimedEvent:
    time: float
    action: EventAction


@dataclass(frozen=True)
class Scenario:
    """A timeline: initial condition, events, and solver settings."""

    config: SystemConfig
    initial_deltas: tuple[float, ...]
    events: tuple[TimedEvent, ...] = ()
    duration: float = 1.0
    dt: float = 1e-3
    record_decimation: int = 10

    def __post_init__(self):
        object.__setattr__(self, "initial_deltas", tuple(float(d) for d in self.initial_deltas))
        object.__setattr__(self, "events", tuple(self.events))

    def validate(self) -> int:
        """Check cross-field constraints; returns the step count."""
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ValidationError(f"duration must be > 0, got {self.duration}")
        if not (isinstance(self.record_decimation, int) and self.record_decimation >= 1):
            raise ValidationError(
                f"record_decimation must be an integer >= 1, got {self.record_decimation!r}"
            )
        if len(self.initial_deltas) != self.config.n:
            raise ValidationError(
                f"initial_deltas has {len(self.initial_deltas)} entries for n={self.config.n} modules"
            )
        if any(not math.isfinite(d) for d in self.initial_deltas):
            raise ValidationError("initial_deltas must be finite")
        steps = _exact_step(self.duration, self.dt, "duration")
        if steps < 1:
            raise ValidationError("duration must cover at least one step")
        last = -math.inf
        for ev in self.events:
            if ev.time < last:
                raise ValidationError("events must be sorted by time")
            last = ev.time
            if not (0.0 <= ev.time <= self.duration):
                raise ValidationError(f"event time {ev.time} outside [0, {self.duration}]")
            _exact_step(ev.time, self.dt, "event time")
            if isinstance(ev.action, SetInitialDelta):
                if not (1 <= ev.action.index <= self.config.n):
                    raise ValidationError(
                        f"angle-reset index {ev.action.index} outside 1..{self.config.n}"
                    )
        return steps


def _exact_step(t: float, dt: float, what: str) -> int:
    k = round(t / dt)
    if abs(t - k * dt) > 1e-9 * max(1.0, abs(t)):
        raise ValidationError(f"{what} {t} is not a multiple of dt={dt}")
    return k


@dataclass(frozen=True)
class Trace:
    """Recorded per-sample channels; columns are modules, rows are samples."""

    times: np.ndarray
    frequency_hz: np.ndarray
    active: np.ndarray
    reactive: np.ndarray
    pf_angle: np.ndarray

    def __post_init__(self):
        rows = len(self.times)
        for arr in (self.frequency_hz, self.active, self.reactive, self.pf_angle):
            if arr.shape != self.frequency_hz.shape or arr.shape[0] != rows:
                raise ValidationError("trace channels must share one (samples, modules) shape")
        if rows > 1 and not np.all(np.diff(self.times) > 0):
            raise ValidationError("trace times must be strictly increasing")
        for arr in (self.times, self.frequency_hz, self.active, self.reactive, self.pf_angle):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.times)

    @property
    def module_count(self) -> int:
        return self.frequency_hz.shape[1]


class SimulationResult(NamedTuple):
    trace: Trace
    final_states: list[InverterState]


class _Plant:
    """Mutable runtime copy of the configuration plus the hot evaluation loop."""

    __slots__ = (
        "n", "v_star", "w_star", "m", "phi_star", "w_lo", "w_hi",
        "mode", "line_z", "load_z", "sink", "z", "zero_floor",
    )

    def __init__(self, config: SystemConfig):
        d = config.droop
        self.n = config.n
        self.v_star = d.nominal_voltage
        self.w_star = d.nominal_omega
        self.m = d.droop_gain
        self.phi_star = d.nominal_pf_angle
        if d.freq_clamp is None:
            self.w_lo = self.w_hi = None
        else:
            self.w_lo = TAU * d.freq_clamp[0]
            self.w_hi = TAU * d.freq_clamp[1]
        self.mode = config.mode
        self.line_z = config.line.rect
        self.load_z = config.load.rect
        self.sink = cmath.rect(config.grid_voltage, config.grid_angle)
        self.refresh_topology()

    def refresh_topology(self) -> None:
        if self.mode is Mode.ISLANDED:
            z = self.line_z + self.load_z
            if abs(z) < 1e-12:
                raise SingularImpedanceError(
                    f"islanded series impedance cancels to {abs(z):.3e} ohm"
                )
            self.z = z
        else:
            self.z = self.line_z
        scale = self.n * self.v_star * self.v_star / abs(self.z)
        self.zero_floor = _ZERO_POWER_FRACTION * scale

    def _sink_now(self) -> complex:
        return self.sink if self.mode is Mode.GRID_CONNECTED else 0j

    def rhs(self, deltas: list[float], held: list[float]) -> list[float]:
        """Angle velocities (rad/s, frame-relative) at the given angles."""
        rect = cmath.rect
        v_star = self.v_star
        volts = [rect(v_star, d) for d in deltas]
        total = 0j
        for v in volts:
            total += v
        icon = ((total - self._sink_now()) / self.z).conjugate()
        atan2 = math.atan2
        floor = self.zero_floor
        m = self.m
        phi_star = self.phi_star
        w_star = self.w_star
        w_lo = self.w_lo
        w_hi = self.w_hi
        out = []
        for i, v in enumerate(volts):
            s = v * icon
            p = s.real
            q = s.imag
            if -floor < p < floor and -floor < q < floor:
                phi = held[i]
            else:
                phi = atan2(q, p)
            err = phi - phi_star
            if err > PI:
                err -= TAU
            elif err <= -PI:
                err += TAU
            w = w_star - m * err
            if w_lo is not None:
                if w < w_lo:
                    w = w_lo
                elif w > w_hi:
                    w = w_hi
            out.append(w - w_star)
        return out

    def measure(self, deltas: list[float], held: list[float]):
        """Full measurement at the given angles.

        Returns (phis, actives, reactives, omegas, rates) and updates
        ``held`` in place wherever the measurement was valid.
        """
        rect = cmath.rect
        v_star = self.v_star
        volts = [rect(v_star, d) for d in deltas]
        total = 0j
        for v in volts:
            total += v
        icon = ((total - self._sink_now()) / self.z).conjugate()
        atan2 = math.atan2
        floor = self.zero_floor
        m = self.m
        phi_star = self.phi_star
        w_star = self.w_star
        w_lo = self.w_lo
        w_hi = self.w_hi
        phis = []
        actives = []
        reactives = []
        omegas = []
        rates = []
        for i, v in enumerate(volts):
            s = v * icon
            p = s.real
            q = s.imag
            if -floor < p < floor and -floor < q < floor:
                phi = held[i]
            else:
                phi = atan2(q, p)
                if phi <= -PI:
                    phi = PI
                held[i] = phi
            err = phi - phi_star
            if err > PI:
                err -= TAU
            elif err <= -PI:
                err += TAU
            w = w_star - m * err
            if w_lo is not None:
                if w < w_lo:
                    w = w_lo
                elif w > w_hi:
                    w = w_hi
            phis.append(phi)
            actives.append(p)
            reactives.append(q)
            omegas.append(w)
            rates.append(w - w_star)
        return phis, actives, reactives, omegas, rates

    def rk4_step(self, deltas: list[float], held: list[float], dt: float,
                 k1: list[float] | None = None) -> list[float]:
        if k1 is None:
            k1 = self.rhs(deltas, held)
        half = 0.5 * dt
        k2 = self.rhs([d + half * k for d, k in zip(deltas, k1)], held)
        k3 = self.rhs([d + half * k for d, k in zip(deltas, k2)], held)
        k4 = self.rhs([d + dt * k for d, k in zip(deltas, k3)], held)
        sixth = dt / 6.0
        return [
            d + sixth * (a + 2.0 * (b + c) + e)
            for d, a, b, c, e in zip(deltas, k1, k2, k3, k4)
        ]

    def apply(self, action: EventAction) -> None:
        if isinstance(action, SetMode):
            self.mode = action.mode
            self.refresh_topology()
        elif isinstance(action, SetLoad):
            self.load_z = action.load.rect
            if self.mode is Mode.ISLANDED:
                self.refresh_topology()
        elif isinstance(action, SetLine):
            self.line_z = action.line.rect
            self.refresh_topology()
        elif isinstance(action, SetPfRef):
            self.phi_star = wrap_angle(action.pf_angle)
        else:
            raise ValidationError(f"unsupported event action {action!r}")


EventCallback = Callable[[float, EventAction, list[float], list[float]], None]


def simulate(scenario: Scenario, on_event: EventCallback | None = None) -> SimulationResult:
    """Run a scenario to completion; deterministic for identical inputs.

    Parameters
    ----------
    scenario : Scenario
        Validated timeline.  The scenario object is never mutated.
    on_event : callable, optional
        Invoked as ``on_event(time, action, deltas_before, deltas_after)``
        with copies of the angle vector around each event application.
    """
    steps = scenario.validate()
    plant = _Plant(scenario.config)
    deltas = list(scenario.initial_deltas)
    held = [scenario.config.droop.nominal_pf_angle] * plant.n
    dt = scenario.dt
    decim = scenario.record_decimation

    schedule = [(_exact_step(ev.time, dt, "event time"), ev.action) for ev in scenario.events]
    ev_idx = 0
    n_events = len(schedule)

    times: list[float] = []
    freq_rows: list[list[float]] = []
    p_rows: list[list[float]] = []
    q_rows: list[list[float]] = []
    phi_rows: list[list[float]] = []

    last_measure = None
    for k in range(steps + 1):
        while ev_idx < n_events and schedule[ev_idx][0] == k:
            action = schedule[ev_idx][1]
            before = deltas.copy() if on_event is not None else None
            if isinstance(action, SetInitialDelta):
                deltas[action.index - 1] = float(action.delta)
            else:
                try:
                    plant.apply(action)
                except SingularImpedanceError as exc:
                    raise SingularImpedanceError(f"at event time t={k * dt:g} s: {exc}") from exc
            if on_event is not None:
                on_event(k * dt, action, before, deltas.copy())
            ev_idx += 1
        phis, actives, reactives, omegas, rates = plant.measure(deltas, held)
        last_measure = (phis, actives, reactives, omegas)
        if k % decim == 0 or k == steps:
            times.append(k * dt)
            freq_rows.append([w / TAU for w in omegas])
            p_rows.append(actives)
            q_rows.append(reactives)
            phi_rows.append(phis)
        if k < steps:
            deltas = plant.rk4_step(deltas, held, dt, k1=rates)

    phis, actives, reactives, omegas = last_measure
    final = [
        InverterState(
            delta=deltas[i],
            voltage=plant.v_star,
            power=PowerPair(actives[i], reactives[i]),
            pf_angle=phis[i],
            omega=omegas[i],
        )
        for i in range(plant.n)
    ]
    trace = Trace(
        times=np.asarray(times, dtype=float),
        frequency_hz=np.asarray(freq_rows, dtype=float),
        active=np.asarray(p_rows, dtype=float),
        reactive=np.asarray(q_rows, dtype=float),
        pf_angle=np.asarray(phi_rows, dtype=float),
    )
    return SimulationResult(trace, final)


def run_scenario(scenario: Scenario) -> Trace:
    """Deterministic trace of a scenario from t=0 to its duration."""
    return simulate(scenario).trace


def step(states: list[InverterState], config: SystemConfig, dt: float) -> list[InverterState]:
    """Advance every module by one RK4 step and refresh its measurements."""
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValidationError(f"dt must be > 0, got {dt}")
    if len(states) != config.n:
        raise ValidationError(f"got {len(states)} states for n={config.n} modules")
    plant = _Plant(config)
    deltas = [s.delta for s in states]
    held = [s.pf_angle for s in states]
    new_deltas = plant.rk4_step(deltas, held, dt)
    phis, actives, reactives, omegas, _ = plant.measure(new_deltas, held)
    return [
        InverterState(
            delta=new_deltas[i],
            voltage=plant.v_star,
            power=PowerPair(actives[i], reactives[i]),
            pf_angle=phis[i],
            omega=omegas[i],
        )
        for i in range(config.n)
    ]


# --- equilibria -----------------------------------------------------------


class IslandedEquilibrium(NamedTuple):
    delta_common: float
    frequency_hz: float
    power: PowerPair


class GridRoot(NamedTuple):
    delta: float
    lambda_slow: float
    verdict: linearization.Stability


class GridEquilibrium(NamedTuple):
    delta_s: float
    roots: tuple[GridRoot, ...]


def islanded_equilibrium(config: SystemConfig) -> IslandedEquilibrium:
    """Closed-form synchronized operating point of the islanded string.

    All angles equal (the common angle is a free symmetry; 0 is returned as
    the representative), every module measures the generalized-load angle,
    and the shared frequency is the droop law evaluated there.
    """
    if config.mode is not Mode.ISLANDED:
        raise ValidationError("islanded_equilibrium requires an islanded configuration")
    z = generalized_load(config.line, config.load)
    d = config.droop
    omega = d.nominal_omega - d.droop_gain * wrap_angle(z.angle - d.nominal_pf_angle)
    if d.freq_clamp is not None:
        omega = min(max(omega, TAU * d.freq_clamp[0]), TAU * d.freq_clamp[1])
    v = d.nominal_voltage
    scale = config.n * v * v / z.magnitude
    return IslandedEquilibrium(
        0.0,
        omega / TAU,
        PowerPair(scale * math.cos(z.angle), scale * math.sin(z.angle)),
    )


def synchronized_grid_power(config: SystemConfig, delta_common: float) -> PowerPair:
    """Per-module power of the grid-tied string with every angle at ``delta_common``."""
    v = cmath.rect(config.droop.nominal_voltage, delta_common)
    total = config.n * v - cmath.rect(config.grid_voltage, config.grid_angle)
    s = v * (total / config.line.rect).conjugate()
    return PowerPair(s.real, s.imag)


def _synchronized_residual(config: SystemConfig, delta: float) -> float | None:
    """wrap(phi(delta) - phi*), or None inside the zero-power hole."""
    s = synchronized_grid_power(config, delta)
    scale = config.n * config.droop.nominal_voltage ** 2 / config.line.magnitude
    if s.apparent < 1e-9 * scale:
        return None
    return wrap_angle(math.atan2(s.reactive, s.active) - config.droop.nominal_pf_angle)


_SCAN_POINTS = 360  # one-degree bracketing resolution


def grid_equilibrium(config: SystemConfig) -> GridEquilibrium:
    """Synchronized grid-mode operating points: roots of wrap(phi(delta) - phi*) = 0.

    A one-degree scan over (-pi, pi] brackets every root (wrapped-residual
    seam jumps are excluded by requiring the bracket endpoints to differ by
    less than pi), then bisection polishes each to 1e-12.  The returned
    ``delta_s`` is the first root whose grid-mode Jacobian is stable; every
    root found is reported alongside.

    Raises NoRootError when the scan finds no sign change: the requested
    power factor angle is unreachable at this sizing.
    """
    if config.mode is not Mode.GRID_CONNECTED:
        raise ValidationError("grid_equilibrium requires a grid-connected configuration")
    step_w = TAU / _SCAN_POINTS
    grid_pts = [-PI + (k + 1) * step_w for k in range(_SCAN_POINTS)]
    residuals = [_synchronized_residual(config, d) for d in grid_pts]

    roots: list[float] = []
    for i in range(_SCAN_POINTS):
        a = grid_pts[i - 1] if i > 0 else grid_pts[0] - step_w
        b = grid_pts[i]
        ra = residuals[i - 1] if i > 0 else _synchronized_residual(config, a)
        rb = residuals[i]
        if ra is None or rb is None:
            continue
        if ra == 0.0:
            roots.append(wrap_angle(a))
            continue
        if ra * rb > 0.0 or abs(rb - ra) >= PI:
            continue  # no crossing, or a seam jump of the wrapped residual
        lo, hi, rlo = a, b, ra
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            rm = _synchronized_residual(config, mid)
            if rm is None or rm == 0.0:
                lo = hi = mid
                break
            if (rm > 0.0) == (rlo > 0.0):
                lo, rlo = mid, rm
            else:
                hi = mid
            if hi - lo < 1e-13:
                break
        roots.append(wrap_angle(0.5 * (lo + hi)))
    if residuals[-1] == 0.0:
        roots.append(grid_pts[-1])

    # Deduplicate near-identical roots from adjacent brackets.
    uniq: list[float] = []
    for r in sorted(roots):
        if not uniq or abs(r - uniq[-1]) > 1e-9:
            uniq.append(r)
    if not uniq:
        raise NoRootError(
            "no synchronized grid-mode operating point: the power factor angle reference "
            "is unreachable for this string sizing and line"
        )

    d = config.droop
    infos = []
    for r in uniq:
        try:
            lin = linearization.grid_ab(
                config.n, d.nominal_voltage, config.grid_voltage,
                wrap_angle(r - config.grid_angle),
            )
            lam = -d.droop_gain * (lin.a + (config.n - 1) * lin.b)
            verdict = linearization.grid_jacobian(lin, config.n, d.droop_gain).stable
        except ValidationError:
            lam = math.nan
            verdict = linearization.Stability.MARGINAL
        infos.append(GridRoot(r, lam, verdict))

    for want in (linearization.Stability.STABLE, linearization.Stability.MARGINAL):
        for info in infos:
            if info.verdict is want:
                return GridEquilibrium(info.delta, tuple(infos))
    return GridEquilibrium(infos[0].delta, tuple(infos))
