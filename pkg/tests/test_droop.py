"""The droop law: four-quadrant measurement, wrapped error, clamp."""

import math

import numpy as np
import pytest

from cascade_droop import (
    DroopParams,
    PowerPair,
    ValidationError,
    ZeroPowerError,
    droop_frequency,
    power_factor_angle,
    voltage_reference,
)

PI = math.pi
TAU = math.tau


def make_params(m=0.5, phi_star=0.2, f_star=50.0, v_star=78.75, clamp=(49.0, 51.0)):
    return DroopParams(TAU * f_star, v_star, phi_star, m, clamp)


def test_power_factor_angle_quadrants():
    assert power_factor_angle(PowerPair(1.0, 1.0)) == pytest.approx(PI / 4)
    assert power_factor_angle(PowerPair(-1.0, 1.0)) == pytest.approx(3 * PI / 4)
    assert power_factor_angle(PowerPair(-1.0, -1.0)) == pytest.approx(-3 * PI / 4)
    assert power_factor_angle(PowerPair(1.0, -1.0)) == pytest.approx(-PI / 4)


def test_power_factor_angle_zero_power_errors():
    with pytest.raises(ZeroPowerError):
        power_factor_angle(PowerPair(0.0, 0.0))
    with pytest.raises(ZeroPowerError):
        power_factor_angle(PowerPair(1e-9, -1e-9), rated=1e6)
    # the same powers are fine against a small rated power
    assert power_factor_angle(PowerPair(1e-9, -1e-9), rated=1.0) == pytest.approx(-PI / 4)


def test_power_factor_angle_matches_atan_where_p_positive():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p = float(rng.uniform(0.1, 100.0))
        q = float(rng.uniform(-100.0, 100.0))
        assert power_factor_angle(PowerPair(p, q)) == pytest.approx(
            math.atan(q / p), abs=1e-15
        )


def test_droop_frequency_at_reference_is_nominal():
    params = make_params()
    assert droop_frequency(0.2, params) == pytest.approx(TAU * 50.0)


def test_droop_frequency_table_values():
    # phi=0 against phi*=0.2 at m=0.5 raises the frequency by 0.1 rad/s
    params = make_params()
    w = droop_frequency(0.0, params)
    assert w == pytest.approx(TAU * 50.0 + 0.1)
    assert w / TAU == pytest.approx(50.01591549430919)


def test_droop_error_wraps_across_seam():
    # phi and phi* on opposite sides of the seam: short-path error is -0.2
    params = make_params(phi_star=-PI + 0.1)
    w = droop_frequency(PI - 0.1, params)
    assert w == pytest.approx(TAU * 50.0 + 0.1)


def test_droop_linearity_and_monotonicity_unclamped():
    params = make_params(m=0.8, phi_star=0.7, clamp=None)
    rng = np.random.default_rng(5)
    for _ in range(200):
        e = float(rng.uniform(-PI + 1e-6, PI - 1e-6))
        plus = droop_frequency(params.nominal_pf_angle + e, params)
        minus = droop_frequency(params.nominal_pf_angle - e, params)
        assert plus + minus == pytest.approx(2 * params.nominal_omega, rel=1e-12)
    errors = np.sort(rng.uniform(-PI + 1e-6, PI, size=50))
    freqs = [droop_frequency(params.nominal_pf_angle + e, params) for e in errors]
    assert all(a > b for a, b in zip(freqs, freqs[1:]))


def test_clamp_containment():
    params = make_params(m=5.0)
    rng = np.random.default_rng(9)
    for phi in rng.uniform(-4 * PI, 4 * PI, size=500):
        f = droop_frequency(float(phi), params) / TAU
        assert 49.0 <= f <= 51.0


def test_voltage_reference_is_constant():
    params = make_params()
    assert voltage_reference(params) == 78.75
    assert voltage_reference(params) == voltage_reference(params)


def test_params_validation():
    with pytest.raises(ValidationError):
        make_params(m=-1.0)
    with pytest.raises(ValidationError):
        make_params(m=0.0)
    with pytest.raises(ValidationError):
        DroopParams(TAU * 50.0, 78.75, 0.2, 0.5, (51.0, 49.0))
    with pytest.raises(ValidationError):
        DroopParams(TAU * 50.0, 78.75, 0.2, 0.5, (50.5, 51.0))  # band misses nominal
    # reference angle stored wrapped
    params = make_params(phi_star=2 * PI + 0.3)
    assert params.nominal_pf_angle == pytest.approx(0.3)
