"""Ridge (Tikhonov) solves in the SVD basis and L-curve corner selection."""

import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentException

logger = logging.getLogger(__name__)

TINY = 1e-300


@dataclass(frozen=True)
class LCurve:
    lambdas: np.ndarray
    residual_norms: np.ndarray
    solution_norms: np.ndarray
    curvature: np.ndarray
    corner: int

    @property
    def selected(self) -> float:
        return float(self.lambdas[self.corner])


def filter_factors(s: np.ndarray, lam: float) -> np.ndarray:
    """s / (s² + λ), zero where s = 0."""
    s = np.asarray(s, dtype=np.float64)
    denom = s**2 + lam
    out = np.zeros_like(s)
    np.divide(s, denom, out=out, where=(s != 0) & (denom > 0))
    return out


def lambda_grid(s: np.ndarray, n_points: int = 20) -> np.ndarray:
    """Logarithmic grid spanning the squared nonzero singular values."""
    s = np.asarray(s, dtype=np.float64)
    positive = s[s > 0]
    if positive.size == 0:
        raise InvalidArgumentException("no nonzero singular values")
    top = float(positive.max()) ** 2
    bottom = max(float(positive.min()) ** 2, top * 1e-14)
    if bottom >= top:
        bottom = top * 1e-6
    return np.logspace(np.log10(bottom), np.log10(top), n_points)


def l_curve(
    s: np.ndarray,
    coefficients: np.ndarray,
    outside_norm2: float = 0.0,
    n_points: int = 20,
) -> LCurve:
    """Maximum-curvature corner of the log–log curve (‖HX−B‖, ‖X‖) over λ.

    coefficients holds Uᵀ B (one row per singular value, any number of
    columns) and outside_norm2 the squared norm of B outside range(U).
    """
    s = np.asarray(s, dtype=np.float64)
    coeff = np.asarray(coefficients, dtype=np.float64).reshape(len(s), -1)
    energy = np.sum(coeff**2, axis=1)
    lambdas = lambda_grid(s, n_points)

    residual = np.empty(n_points)
    solution = np.empty(n_points)
    for idx, lam in enumerate(lambdas):
        shrink = lam / (s**2 + lam)
        residual[idx] = np.sqrt(np.sum(shrink**2 * energy) + outside_norm2)
        solution[idx] = np.sqrt(np.sum(filter_factors(s, lam) ** 2 * energy))

    x = np.log(np.maximum(residual, TINY))
    y = np.log(np.maximum(solution, TINY))
    dx, dy = np.gradient(x), np.gradient(y)
    ddx, ddy = np.gradient(dx), np.gradient(dy)
    speed = (dx**2 + dy**2) ** 1.5
    curvature = np.zeros(n_points)
    np.divide(dx * ddy - dy * ddx, speed, out=curvature, where=speed > 0)

    interior = curvature[1:-1]
    corner = int(np.argmax(interior)) + 1 if interior.size else 0
    logger.debug("L-curve corner at λ=%.4g (index %d of %d)", lambdas[corner], corner, n_points)
    return LCurve(lambdas, residual, solution, curvature, corner)


def ridge_solve(U: np.ndarray, s: np.ndarray, Vt: np.ndarray, B: np.ndarray, lam: float) -> np.ndarray:
    """argmin ‖HX − B‖² + λ‖X‖² for H = U diag(s) Vᵀ."""
    return Vt.T @ (filter_factors(s, lam)[:, None] * (U.T @ B))
