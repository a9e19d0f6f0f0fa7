"""The decentralized per-module control law.

Each module measures only its own output power, converts it to a power
factor angle, and droops its frequency against that angle:

    omega_i = omega_star - m * wrap(phi_i - phi_star)
    V_i     = V_star                      (no amplitude droop)

The wrap makes the error take the short way around the circle, so a
reference step across the +/-pi seam is tracked without a full-turn
excursion.  An optional output clamp keeps the commanded frequency inside a
configured band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError, ZeroPowerError
from .phasors import PowerPair, wrap_angle

TAU = math.tau


@dataclass(frozen=True)
class DroopParams:
    """Controller constants shared by every module of one string.

    nominal_omega : rad/s, the frequency commanded at zero angle error
    nominal_voltage : volts, the fixed amplitude reference
    nominal_pf_angle : radians in (-pi, pi], the power-factor-angle setpoint
    droop_gain : 1/s, positive slope of the frequency droop
    freq_clamp : optional (low, high) band in Hz applied to the output
    """

    nominal_omega: float
    nominal_voltage: float
    nominal_pf_angle: float
    droop_gain: float
    freq_clamp: tuple[float, float] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.nominal_omega) and self.nominal_omega > 0.0):
            raise ValidationError(f"nominal_omega must be > 0, got {self.nominal_omega}")
        if not (math.isfinite(self.nominal_voltage) and self.nominal_voltage > 0.0):
            raise ValidationError(f"nominal_voltage must be > 0, got {self.nominal_voltage}")
        if not (math.isfinite(self.droop_gain) and self.droop_gain > 0.0):
            raise ValidationError(f"droop_gain must be > 0, got {self.droop_gain}")
        object.__setattr__(self, "nominal_pf_angle", wrap_angle(self.nominal_pf_angle))
        if self.freq_clamp is not None:
            lo, hi = self.freq_clamp
            f_star = self.nominal_omega / TAU
            if not (lo < f_star < hi):
                raise ValidationError(
                    f"freq_clamp must straddle the nominal frequency: {lo} < {f_star:g} < {hi} fails"
                )
            object.__setattr__(self, "freq_clamp", (float(lo), float(hi)))

    @property
    def nominal_frequency_hz(self) -> float:
        return self.nominal_omega / TAU


def power_factor_angle(power: PowerPair, rated: float = 1.0) -> float:
    """Four-quadrant angle atan2(Q, P) in (-pi, pi].

    Raises ZeroPowerError when both |P| and |Q| fall below 1e-12 of the
    rated power: the ratio is undefined at zero current.  Callers that must
    survive a dead start (the simulation engine) hold the previous
    measurement instead of calling this.
    """
    if rated <= 0.0:
        raise ValidationError(f"rated power must be > 0, got {rated}")
    floor = 1e-12 * rated
    if abs(power.active) < floor and abs(power.reactive) < floor:
        raise ZeroPowerError(
            f"power factor angle undefined: |P|={abs(power.active):.3e} W and "
            f"|Q|={abs(power.reactive):.3e} var are both below {floor:.3e}"
        )
    return wrap_angle(math.atan2(power.reactive, power.active))


def droop_frequency(phi: float, params: DroopParams) -> float:
    """Commanded angular frequency for a measured power factor angle, in rad/s."""
    if not math.isfinite(phi):
        raise ValidationError("measured power factor angle must be finite")
    omega = params.nominal_omega - params.droop_gain * wrap_angle(phi - params.nominal_pf_angle)
    if params.freq_clamp is not None:
        lo, hi = params.freq_clamp
        omega = min(max(omega, TAU * lo), TAU * hi)
    return omega


def voltage_reference(params: DroopParams) -> float:
    """Amplitude command: the constant-voltage law."""
    return params.nominal_voltage
