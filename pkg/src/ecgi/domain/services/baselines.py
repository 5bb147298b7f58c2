"""Reference reconstructions: temporal-SVD Tikhonov and a fixed physiological prior."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from ..entities import ECGSequence, HeartMesh, LeadField, TMPSequence
from ..exceptions import ConfigurationException, InvalidArgumentException, SolverException
from ..value_objects import FixedEPConfig, GreensiteConfig, LambdaMode, PacingConfig
from .regularization import filter_factors, l_curve
from .simulation import simulate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GreensiteEstimate:
    tmp: TMPSequence
    lambda_: float
    rank: int
    degenerate: bool = False


@dataclass(frozen=True)
class FixedEPEstimate:
    tmp: TMPSequence
    model_tmp: TMPSequence
    sigma2: float
    beta: float


def _ecg_matrix(Y: Union[np.ndarray, ECGSequence]) -> np.ndarray:
    return Y.Y if isinstance(Y, ECGSequence) else np.asarray(Y, dtype=np.float64)


def energy_rank(s: np.ndarray, fraction: float) -> int:
    """Smallest r whose leading singular values hold at least fraction of Σs²."""
    energy = s**2
    total = float(energy.sum())
    if total == 0:
        return 0
    cumulative = np.cumsum(energy) / total
    return int(np.searchsorted(cumulative, fraction - 1e-12) + 1)


def greensite_reconstruct(
    lead_field: LeadField,
    Y: Union[np.ndarray, ECGSequence],
    config: GreensiteConfig = GreensiteConfig(),
    dt_effective: float = 1.0,
) -> GreensiteEstimate:
    """Tikhonov inversion of the dominant temporal modes of Y.

    Y ≈ Y V_r V_rᵀ from its SVD truncated at the requested energy; each spatial
    mode Y v_i is inverted with one ridge parameter and the modes are recombined.
    """
    Y = _ecg_matrix(Y)
    H = lead_field.H
    m, n = H.shape
    if Y.ndim != 2 or Y.shape[0] != m:
        raise InvalidArgumentException(f"Y must have {m} rows, got shape {Y.shape}")
    T = Y.shape[1]

    _, y_s, y_vt = np.linalg.svd(Y, full_matrices=False)
    rank = energy_rank(y_s, config.energy_fraction)
    if rank == 0:
        logger.warning("Greensite: Y has no energy, returning zeros")
        return GreensiteEstimate(TMPSequence(np.zeros((n, T)), dt_effective), 0.0, 0, True)

    V_r = y_vt[:rank].T
    modes = Y @ V_r

    h_u, h_s, h_vt = np.linalg.svd(H, full_matrices=False)
    coefficients = h_u.T @ modes
    if config.lambda_mode is LambdaMode.FIXED:
        lam = config.lambda_fixed
    else:
        outside = max(float(np.sum(modes**2) - np.sum(coefficients**2)), 0.0)
        lam = l_curve(h_s, coefficients, outside, config.n_lambdas).selected
    spatial = h_vt.T @ (filter_factors(h_s, lam)[:, None] * coefficients)
    U_hat = spatial @ V_r.T

    logger.info("Greensite: rank %d, λ=%.4g", rank, lam)
    return GreensiteEstimate(TMPSequence(U_hat, dt_effective), float(lam), rank)


def minimum_z_face(mesh: HeartMesh) -> Tuple[int, ...]:
    z = mesh.node_coords[:, 2]
    return tuple(int(i) for i in np.flatnonzero(np.isclose(z, z.min())))


def fixed_ep_reconstruct(
    lead_field: LeadField,
    Y: Union[np.ndarray, ECGSequence],
    mesh: HeartMesh,
    beta: float,
    config: FixedEPConfig = FixedEPConfig(),
    model_tmp: Optional[TMPSequence] = None,
) -> FixedEPEstimate:
    """MAP estimate under N(U_model, σ²I) where U_model is one default simulation.

    A single Cholesky factor of βHᵀH + I/σ² serves every column.
    """
    Y = _ecg_matrix(Y)
    H = lead_field.H
    if not (np.isfinite(beta) and beta > 0):
        raise InvalidArgumentException(f"beta must be positive, got {beta}")
    if Y.ndim != 2 or Y.shape[0] != H.shape[0]:
        raise InvalidArgumentException(f"Y must have {H.shape[0]} rows, got shape {Y.shape}")
    if mesh.node_count != H.shape[1]:
        raise ConfigurationException("mesh and lead field disagree on the node count")

    if model_tmp is None:
        origins = config.origin_nodes or minimum_z_face(mesh)
        pacing = PacingConfig(
            origin_nodes=tuple(origins),
            stim_start=config.pacing.stim_start,
            stim_duration=config.pacing.stim_duration,
            stim_amplitude=config.pacing.stim_amplitude,
        )
        model_tmp = simulate(mesh, config.ap_params, pacing)
    if model_tmp.column_count != Y.shape[1]:
        raise ConfigurationException(
            f"default model has {model_tmp.column_count} columns, ECG has {Y.shape[1]}"
        )

    precision = beta * H.T @ H + np.eye(H.shape[1]) / config.sigma2
    rhs = beta * H.T @ Y + model_tmp.U / config.sigma2
    try:
        factor = linalg.cho_factor(precision, lower=True)
    except linalg.LinAlgError as e:
        raise SolverException("fixed-prior precision matrix is not positive definite") from e
    U_hat = linalg.cho_solve(factor, rhs)

    logger.info("fixed-EP: σ²=%.3g, β=%.4g", config.sigma2, beta)
    return FixedEPEstimate(
        TMPSequence(U_hat, model_tmp.dt_effective), model_tmp, config.sigma2, float(beta)
    )
