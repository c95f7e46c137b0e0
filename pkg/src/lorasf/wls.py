"""Weighted least-squares accuracy pipeline: residuals to sigma_pos, pos_bias, ACC.

One linearized evaluation per point, no iteration. The 3x3 normal matrix is
inverted in closed form (adjugate over determinant) so results are fully
deterministic; an explicit condition-number gate reports degenerate geometry
instead of returning garbage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299_792_458.0  # exact, not configurable

# Frobenius-norm condition number above which the normal matrix is treated
# as singular (collinear or near-collinear station bearings).
CONDITION_LIMIT = 1e8


class SingularGeometry(Exception):
    """Normal matrix is rank deficient or too ill conditioned to invert."""


@dataclass(frozen=True)
class AccResult:
    """Accuracy figures at one evaluation point.

    ``status`` is "OK" or "NoFix"; numeric fields are NaN for NoFix.
    ``acc**2 == sigma_pos**2 + pos_bias**2`` on every OK result.
    """

    status: str
    reason: str = ""
    sigma_pos: float = math.nan
    pos_bias: float = math.nan
    acc: float = math.nan
    clock_bias: float = math.nan

    @property
    def ok(self) -> bool:
        return self.status == "OK"

    @staticmethod
    def no_fix(reason: str) -> "AccResult":
        return AccResult(status="NoFix", reason=reason)


def range_bias(residual_us) -> np.ndarray:
    """Convert ASF residuals (microseconds) to range biases (meters): d = c*r."""
    r = np.asarray(residual_us, dtype=float)
    return (r * 1e-6) * SPEED_OF_LIGHT_M_S


def normal_matrix(geometry: np.ndarray, weights) -> np.ndarray:
    """M = G^T W G for diagonal positive weights.

    Entries are mirrored explicitly so M is exactly symmetric. Raises
    SingularGeometry if the result fails the condition gate.
    """
    G = np.asarray(geometry, dtype=float)
    w = np.asarray(weights, dtype=float)
    if G.ndim != 2 or G.shape[1] != 3 or G.shape[0] < 3:
        raise ValueError(f"geometry must be (n>=3, 3), got {G.shape}")
    if w.shape != (G.shape[0],):
        raise ValueError(f"weights shape {w.shape} does not match {G.shape[0]} rows")
    if not (w > 0.0).all():
        raise ValueError("weights must be positive")
    Gw = G * w[:, None]
    M = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            M[i, j] = M[j, i] = Gw[:, i] @ G[:, j]
    invert_3x3(M)  # condition gate; discard the inverse
    return M


def invert_3x3(M: np.ndarray) -> np.ndarray:
    """Closed-form adjugate inverse of a symmetric positive definite matrix.

    The condition gate uses the eigenvalue ratio (the exact 2-norm condition
    number for symmetric M). The adjugate of a near-singular matrix is
    rounding noise of the same size as its determinant, so a gate computed
    from the inverse itself cannot detect rank deficiency.

    Raises:
        SingularGeometry: non-positive spectrum or condition number above
            ``CONDITION_LIMIT``.
    """
    eig = np.linalg.eigvalsh(M)
    if not (eig[0] > 0.0) or not math.isfinite(eig[2]):
        raise SingularGeometry("normal matrix is singular")
    cond = eig[2] / eig[0]
    if cond > CONDITION_LIMIT:
        raise SingularGeometry(f"condition number {cond:.3g} exceeds {CONDITION_LIMIT:.0e}")
    a, b, c = M[0]
    d, e, f = M[1]
    g, h, i = M[2]
    A = e * i - f * h
    B = c * h - b * i
    C = b * f - c * e
    D = f * g - d * i
    E = a * i - c * g
    F = c * d - a * f
    Gc = d * h - e * g
    H = b * g - a * h
    I = a * e - b * d
    det = a * A + b * D + c * Gc
    if det == 0.0 or not math.isfinite(det):
        raise SingularGeometry("normal matrix is singular")
    return np.array([[A, B, C], [D, E, F], [Gc, H, I]], dtype=float) / det


def sigma_pos(M: np.ndarray) -> float:
    """Random position error: sqrt((M^-1)_11 + (M^-1)_22), meters when W is 1/m^2."""
    inv = invert_3x3(M)
    s2 = inv[0, 0] + inv[1, 1]
    if not (s2 > 0.0 and math.isfinite(s2)):
        raise SingularGeometry(f"non-positive horizontal variance {s2}")
    return math.sqrt(s2)


def bias_solution(
    M: np.ndarray, geometry: np.ndarray, weights, d_m
) -> tuple[float, float, float, float]:
    """Solve [dx dy db]^T = M^-1 G^T W d; returns (dx, dy, db, pos_bias).

    ``d_m`` is the range-bias vector in meters; dx/dy are the east/north
    position offsets, db the receiver clock bias (meters).
    """
    G = np.asarray(geometry, dtype=float)
    w = np.asarray(weights, dtype=float)
    d = np.asarray(d_m, dtype=float)
    inv = invert_3x3(M)
    rhs = np.einsum("ki,k,k->i", G, w, d)
    delta = inv @ rhs
    dx, dy, db = float(delta[0]), float(delta[1]), float(delta[2])
    return dx, dy, db, math.hypot(dx, dy)


def acc(sigma_pos_m: float, pos_bias_m: float) -> float:
    """Overall accuracy: ACC = sqrt(sigma_pos^2 + pos_bias^2)."""
    return math.hypot(sigma_pos_m, pos_bias_m)


def solve(geometry: np.ndarray, weights, residual_us) -> AccResult:
    """Full pipeline for one point; degenerate geometry becomes a NoFix result."""
    try:
        M = normal_matrix(geometry, weights)
        sp = sigma_pos(M)
        d = range_bias(residual_us)
        dx, dy, db, pb = bias_solution(M, geometry, weights, d)
    except SingularGeometry as exc:
        return AccResult.no_fix(f"singular geometry: {exc}")
    return AccResult(
        status="OK",
        sigma_pos=sp,
        pos_bias=pb,
        acc=acc(sp, pb),
        clock_bias=db,
    )
