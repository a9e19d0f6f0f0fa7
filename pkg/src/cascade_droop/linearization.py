"""Small-signal models of the closed loop around a synchronized operating point.

Islanded, the angle dynamics linearize to a complete-graph Laplacian scaled
by -m/n: one zero eigenvalue (the rotational symmetry of the string) and
n-1 eigenvalues at exactly -m, independent of the load.  Grid-connected,
the Jacobian is the uniform a/b matrix whose closed-form spectrum is

    lambda_1      = -m * V_g (V_g - n V* cos(dd)) / D
    lambda_2..n   = -m

with dd the string-to-grid angle and D = n^2 V*^2 + V_g^2 - 2 n V* V_g cos(dd).
The sign of (V_g - n V* cos(dd)) alone decides stability; the line impedance
never enters.

Every constructed model carries both the closed-form eigenvalues and the
output of an independent cyclic-Jacobi eigensolver, and refuses to exist if
the two disagree beyond 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AsymmetricMatrixError, DegeneratePointError, ValidationError

_EIG_AGREEMENT = 1e-9
_MARGINAL_BAND = 1e-12  # on lambda_1 / m, dimensionless
_DEGENERATE_DENOM = 1e-12


class Stability(Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class LinearModel:
    """A closed-loop Jacobian with its spectrum computed two independent ways."""

    matrix: np.ndarray
    analytic_eigs: tuple[float, ...]
    numeric_eigs: tuple[float, ...]
    stable: Stability

    def __post_init__(self):
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise ValidationError(f"matrix must be square, got shape {self.matrix.shape}")
        if len(self.analytic_eigs) != n or len(self.numeric_eigs) != n:
            raise ValidationError("eigenvalue lists must have one entry per state")
        worst = max(
            abs(a - b) for a, b in zip(sorted(self.analytic_eigs), sorted(self.numeric_eigs))
        )
        if worst > _EIG_AGREEMENT:
            raise ValidationError(
                f"analytic and numeric eigenvalues disagree by {worst:.3e} (> {_EIG_AGREEMENT:g})"
            )
        self.matrix.flags.writeable = False


@dataclass(frozen=True)
class GridLinearization:
    """Coefficients of the grid-connected angle sensitivity d(phi_i) = a*dd_i + b*sum_j dd_j.

    ``denom`` is the common positive denominator D; ``a - b == 1`` is an
    algebraic identity of the two formulas (held to 1e-12 at well-conditioned
    points; the loose construction-time bound below only catches formula
    bugs, not conditioning).
    """

    a: float
    b: float
    denom: float

    def __post_init__(self):
        if abs(self.a - self.b - 1.0) > 1e-6:
            raise ValidationError(
                f"a - b = {self.a - self.b!r} violates the unit-difference identity"
            )


def _validate_count_gain(n: int, m: float) -> None:
    if not (isinstance(n, int) and n >= 1):
        raise ValidationError(f"module count must be an integer >= 1, got {n!r}")
    if not (math.isfinite(m) and m > 0.0):
        raise ValidationError(f"droop gain must be > 0, got {m}")


def _uniform_structure_eigs(diag: float, off: float, n: int) -> list[float]:
    # Uniform symmetric matrices (diag on the diagonal, off elsewhere) have
    # spectrum {diag + (n-1) off} + {diag - off} x (n-1).
    return sorted([diag + (n - 1) * off] + [diag - off] * (n - 1))


def numeric_eigenvalues(matrix) -> list[float]:
    """All eigenvalues of a real symmetric matrix, ascending, via cyclic Jacobi rotations.

    Deliberately independent of the closed forms used elsewhere in this
    module so the two can check each other.
    """
    a = [list(map(float, row)) for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValidationError("matrix must be square")
    if n == 0:
        raise ValidationError("matrix must be non-empty")
    scale = max((abs(v) for row in a for v in row), default=0.0)
    asym = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            asym = max(asym, abs(a[i][j] - a[j][i]))
    if asym > 1e-12:
        raise AsymmetricMatrixError(f"matrix is asymmetric by {asym:.3e} (> 1e-12)")
    if n == 1:
        return [a[0][0]]
    # Work on an exactly symmetric copy.
    for i in range(n):
        for j in range(i + 1, n):
            v = 0.5 * (a[i][j] + a[j][i])
            a[i][j] = a[j][i] = v
    stop = 1e-13 * max(scale, 1.0)
    for _sweep in range(60):
        off_max = 0.0
        for p in range(n - 1):
            ap = a[p]
            for q in range(p + 1, n):
                apq = ap[q]
                if abs(apq) <= stop:
                    continue
                off_max = max(off_max, abs(apq))
                app = ap[p]
                aqq = a[q][q]
                theta = 0.5 * (aqq - app) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap[p] = app - t * apq
                a[q][q] = aqq + t * apq
                ap[q] = a[q][p] = 0.0
                for i in range(n):
                    if i == p or i == q:
                        continue
                    ai = a[i]
                    aip = ai[p]
                    aiq = ai[q]
                    ai[p] = ap[i] = aip * c - aiq * s
                    ai[q] = a[q][i] = aiq * c + aip * s
        if off_max <= stop:
            break
    return sorted(a[i][i] for i in range(n))


def islanded_jacobian(n: int, m: float) -> LinearModel:
    """Closed-loop Jacobian A = -(m/n) L, with L the complete-graph Laplacian.

    Spectrum {0, -m x (n-1)}; the zero mode is the common rotation of all
    angles, so the verdict is Marginal by construction.
    """
    _validate_count_gain(n, m)
    off = m / n
    diag = -off * (n - 1)
    rows = [[diag if i == j else off for j in range(n)] for i in range(n)]
    analytic = tuple(_uniform_structure_eigs(diag, off, n))
    numeric = tuple(numeric_eigenvalues(rows))
    return LinearModel(np.array(rows, dtype=float), analytic, numeric, Stability.MARGINAL)


def grid_ab(n: int, v_star: float, v_g: float, angle_diff: float) -> GridLinearization:
    """Angle-sensitivity coefficients of the grid-connected string.

    Raises DegeneratePointError when the shared denominator D is not
    positive, i.e. at the operating point where the string voltage phasor
    exactly meets the grid phasor and the current vanishes.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValidationError(f"module count must be an integer >= 1, got {n!r}")
    if not (math.isfinite(v_star) and v_star > 0.0):
        raise ValidationError(f"module voltage must be > 0, got {v_star}")
    if not (math.isfinite(v_g) and v_g >= 0.0):
        raise ValidationError(f"grid voltage must be >= 0, got {v_g}")
    cos_dd = math.cos(angle_diff)
    denom = n * n * v_star * v_star + v_g * v_g - 2.0 * n * v_star * v_g * cos_dd
    if denom <= _DEGENERATE_DENOM:
        raise DegeneratePointError(
            f"denominator {denom:.3e} <= {_DEGENERATE_DENOM:g}: operating point is degenerate "
            "(string phasor coincides with the grid phasor)"
        )
    a = ((n * n - n) * v_star * v_star + v_g * v_g + (1 - 2 * n) * v_star * v_g * cos_dd) / denom
    b = (v_star * v_g * cos_dd - n * v_star * v_star) / denom
    return GridLinearization(a, b, denom)


def _verdict_from_scaled(scaled: float) -> Stability:
    # scaled = -lambda_1 / m; positive means decay.
    if abs(scaled) <= _MARGINAL_BAND:
        return Stability.MARGINAL
    return Stability.STABLE if scaled > 0.0 else Stability.UNSTABLE


def grid_jacobian(lin: GridLinearization, n: int, m: float) -> LinearModel:
    """Grid-connected Jacobian B = -m [[a, b, ...], [b, a, ...], ...].

    Closed-form spectrum: lambda_1 = -m (a + (n-1) b) and lambda_2..n = -m.
    Verdict: Stable if lambda_1 < 0, Marginal within 1e-12*m of zero,
    Unstable otherwise.
    """
    _validate_count_gain(n, m)
    diag = -m * lin.a
    off = -m * lin.b
    rows = [[diag if i == j else off for j in range(n)] for i in range(n)]
    lambda_1 = -m * (lin.a + (n - 1) * lin.b)
    analytic = tuple(sorted([lambda_1] + [-m] * (n - 1)))
    numeric = tuple(numeric_eigenvalues(rows))
    verdict = _verdict_from_scaled(-lambda_1 / m)
    return LinearModel(np.array(rows, dtype=float), analytic, numeric, verdict)


def stability_condition(n: int, v_star: float, v_g: float, angle_diff: float) -> Stability:
    """Grid-mode stability from the sign of V_g - n V* cos(angle_diff) alone.

    The returned verdict always equals the one `grid_jacobian` derives from
    its slow eigenvalue: the two share the (positive) denominator, which
    preserves the sign.
    """
    lin = grid_ab(n, v_star, v_g, angle_diff)
    scaled = v_g * (v_g - n * v_star * math.cos(angle_diff)) / lin.denom
    return _verdict_from_scaled(scaled)
