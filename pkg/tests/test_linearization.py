"""Jacobians, closed-form spectra, the Jacobi eigensolver oracle, and verdicts."""

import math

import numpy as np
import pytest

from cascade_droop import (
    AsymmetricMatrixError,
    DegeneratePointError,
    Impedance,
    Phasor,
    Stability,
    ValidationError,
    grid_ab,
    grid_jacobian,
    grid_power_flow,
    islanded_jacobian,
    islanded_power_flow,
    numeric_eigenvalues,
    power_factor_angle,
    stability_condition,
    wrap_angle,
)

PI = math.pi


# --- numeric eigensolver -----------------------------------------------------


def test_numeric_eigenvalues_identity_and_zero():
    assert numeric_eigenvalues(np.eye(3)) == pytest.approx([1.0, 1.0, 1.0])
    assert numeric_eigenvalues(np.zeros((4, 4))) == pytest.approx([0.0] * 4)


def test_numeric_eigenvalues_complete_graph_laplacian():
    # hand-computed characteristic polynomial of the 3x3 complete-graph
    # Laplacian gives {0, 3, 3}
    lap = [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]]
    eigs = numeric_eigenvalues(lap)
    assert eigs == pytest.approx([0.0, 3.0, 3.0], abs=1e-11)


def test_numeric_eigenvalues_random_vs_numpy():
    rng = np.random.default_rng(17)
    for _ in range(30):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n))
        a = (a + a.T) / 2.0
        got = numeric_eigenvalues(a)
        want = np.linalg.eigvalsh(a)
        assert got == pytest.approx(list(want), abs=1e-10)


def test_numeric_eigenvalues_rejects_bad_input():
    with pytest.raises(AsymmetricMatrixError):
        numeric_eigenvalues([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        numeric_eigenvalues([[1.0, 2.0]])


# --- islanded spectrum --------------------------------------------------------


def test_islanded_jacobian_examples():
    model = islanded_jacobian(4, 0.5)
    assert model.analytic_eigs == pytest.approx([-0.5, -0.5, -0.5, 0.0])
    assert model.stable is Stability.MARGINAL

    single = islanded_jacobian(1, 2.0)
    assert single.matrix == pytest.approx(np.zeros((1, 1)))
    assert single.analytic_eigs == pytest.approx([0.0])

    big = islanded_jacobian(6, 1.3)
    assert max(abs(a - b) for a, b in zip(big.analytic_eigs, big.numeric_eigs)) < 1e-9


def test_islanded_spectrum_exactly_one_zero_mode():
    for n in range(1, 17):
        model = islanded_jacobian(n, 0.9)
        eigs = sorted(model.numeric_eigs)
        zeros = [e for e in eigs if abs(e) < 1e-9]
        rest = [e for e in eigs if abs(e) >= 1e-9]
        assert len(zeros) == 1
        assert all(abs(e + 0.9) < 1e-9 for e in rest)


def test_islanded_jacobian_validation():
    with pytest.raises(ValidationError):
        islanded_jacobian(0, 0.5)
    with pytest.raises(ValidationError):
        islanded_jacobian(4, -0.5)


# --- grid linearization --------------------------------------------------------


def test_grid_ab_hand_value():
    lin = grid_ab(1, 1.0, 1.0, PI / 3)
    assert lin.denom == pytest.approx(1.0)
    assert lin.a == pytest.approx(0.5)
    assert lin.b == pytest.approx(-0.5)


def test_grid_ab_zero_grid_recovers_islanded_coefficients():
    for n in (1, 3, 7):
        lin = grid_ab(n, 42.0, 0.0, 1.234)
        assert lin.a == pytest.approx((n - 1) / n)
        assert lin.b == pytest.approx(-1.0 / n)


def test_grid_ab_identity_a_minus_b():
    rng = np.random.default_rng(23)
    for _ in range(2000):
        n = int(rng.integers(1, 9))
        v_star = float(rng.uniform(5.0, 150.0))
        v_g = float(rng.uniform(0.0, 400.0))
        dd = float(rng.uniform(-PI, PI))
        try:
            lin = grid_ab(n, v_star, v_g, dd)
        except DegeneratePointError:
            continue
        assert abs(lin.a - lin.b - 1.0) <= 1e-12


def test_grid_ab_degenerate_point():
    # string phasor meeting the grid phasor head-on: zero denominator
    with pytest.raises(DegeneratePointError):
        grid_ab(4, 78.75, 315.0, 0.0)


def test_grid_jacobian_fast_modes_are_minus_m():
    rng = np.random.default_rng(29)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        m = float(rng.uniform(0.1, 3.0))
        lin = grid_ab(n, float(rng.uniform(10, 100)), float(rng.uniform(150, 400)),
                      float(rng.uniform(-PI, PI)))
        model = grid_jacobian(lin, n, m)
        fast = sorted(model.analytic_eigs, reverse=True)[: n - 1]
        # all but the slow mode sit exactly at -m
        assert any(e == -m for e in model.analytic_eigs)
        assert max(abs(a - b) for a, b in zip(sorted(model.analytic_eigs),
                                              sorted(model.numeric_eigs))) < 1e-9
        assert len(fast) == n - 1


def test_grid_jacobian_verdicts():
    # stable: quarter-turn angle keeps V_g - n V* cos positive
    lin = grid_ab(4, 78.75, 315.0, PI / 2)
    assert grid_jacobian(lin, 4, 0.5).stable is Stability.STABLE
    # unstable: oversized string aligned with the grid
    lin = grid_ab(4, 100.0, 315.0, 0.0)
    model = grid_jacobian(lin, 4, 0.5)
    assert model.stable is Stability.UNSTABLE
    lam1 = -0.5 * (lin.a + 3 * lin.b)
    assert lam1 == pytest.approx(0.5 * 315.0 * 85.0 / 7225.0)
    # marginal: grid voltage constructed to null the condition exactly
    dd = 0.6628
    v_g = 4 * 100.0 * math.cos(dd)
    assert stability_condition(4, 100.0, v_g, dd) is Stability.MARGINAL
    lin = grid_ab(4, 100.0, v_g, dd)
    assert grid_jacobian(lin, 4, 0.5).stable is Stability.MARGINAL


def test_stability_condition_examples_and_consistency():
    assert stability_condition(4, 78.75, 315.0, PI / 2) is Stability.STABLE
    assert stability_condition(4, 100.0, 315.0, 0.0) is Stability.UNSTABLE
    rng = np.random.default_rng(31)
    for _ in range(2000):
        n = int(rng.integers(1, 9))
        v_star = float(rng.uniform(5.0, 150.0))
        v_g = float(rng.uniform(10.0, 420.0))
        dd = float(rng.uniform(-PI, PI))
        try:
            lin = grid_ab(n, v_star, v_g, dd)
        except DegeneratePointError:
            continue
        m = float(rng.uniform(0.05, 4.0))
        assert stability_condition(n, v_star, v_g, dd) is grid_jacobian(lin, n, m).stable


# --- linearization vs finite differences ---------------------------------------


def _islanded_phi(deltas, v_star, z):
    volts = [Phasor(v_star, d) for d in deltas]
    return [
        power_factor_angle(pq, rated=pq.apparent)
        for pq in islanded_power_flow(volts, z)
    ]


def _grid_phi(deltas, v_star, grid, z):
    volts = [Phasor(v_star, d) for d in deltas]
    return [
        power_factor_angle(pq, rated=pq.apparent)
        for pq in grid_power_flow(volts, grid, z)
    ]


def _central_difference(phi_of, deltas, i, k, h=1e-6):
    up = list(deltas)
    dn = list(deltas)
    up[k] += h
    dn[k] -= h
    return wrap_angle(phi_of(up)[i] - phi_of(dn)[i]) / (2.0 * h)


def test_islanded_linearization_matches_finite_differences():
    rng = np.random.default_rng(37)
    for _ in range(10):
        n = int(rng.integers(1, 7))
        v_star = float(rng.uniform(20.0, 120.0))
        z = Impedance(float(rng.uniform(0.5, 20.0)), float(rng.uniform(-PI / 2, PI / 2)))
        common = float(rng.uniform(-PI, PI))
        deltas = [common] * n
        phi_of = lambda d: _islanded_phi(d, v_star, z)
        for i in range(n):
            for k in range(n):
                want = (n - 1) / n if i == k else -1.0 / n
                assert abs(_central_difference(phi_of, deltas, i, k) - want) < 1e-6


def test_grid_linearization_matches_finite_differences():
    rng = np.random.default_rng(41)
    done = 0
    while done < 10:
        n = int(rng.integers(1, 6))
        v_star = float(rng.uniform(20.0, 120.0))
        v_g = float(rng.uniform(100.0, 400.0))
        delta_s = float(rng.uniform(-PI, PI))
        delta_g = float(rng.uniform(-PI, PI))
        theta = float(rng.uniform(-PI / 2, PI / 2))
        lin_denom_scale = n * v_star * v_g
        try:
            lin = grid_ab(n, v_star, v_g, wrap_angle(delta_s - delta_g))
        except DegeneratePointError:
            continue
        if lin.denom < 0.05 * lin_denom_scale:
            continue
        z = Impedance(0.5, theta)
        grid = Phasor(v_g, delta_g)
        # keep away from the zero-power hole where the angle is ill-conditioned
        string = abs(sum(Phasor(v_star, delta_s).rect for _ in range(n)) - grid.rect)
        if string < 1e-3 * n * v_star:
            continue
        deltas = [delta_s] * n
        phi_of = lambda d: _grid_phi(d, v_star, grid, z)
        for i in range(n):
            for k in range(n):
                want = lin.a if i == k else lin.b
                assert abs(_central_difference(phi_of, deltas, i, k) - want) < 1e-6
        done += 1
