"""Expectation-maximization inversion of ECG into TMP under the learned prior."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from ..entities import (
    DecoderOutput,
    ECGSequence,
    EMIteration,
    EMResult,
    LatentSequence,
    LeadField,
    MeasurementModel,
    PosteriorU,
    VAEWeights,
    ZPrior,
)
from ..exceptions import (
    ConfigurationException,
    EstimationException,
    InvalidArgumentException,
    NonFiniteException,
    SolverException,
)
from ..value_objects import EMConfig, ZInitMode
from .regularization import l_curve
from .svae import decode, decoder_backward, decoder_forward

logger = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)
DEFAULT_BETA_MAX = 1e8


@dataclass(frozen=True)
class NoiseEstimate:
    lambda_: float
    resolved_rank: int
    sigma2: float
    beta: float


def _ecg_matrix(Y: Union[np.ndarray, ECGSequence]) -> np.ndarray:
    return Y.Y if isinstance(Y, ECGSequence) else np.asarray(Y, dtype=np.float64)


def estimate_noise(
    Y: Union[np.ndarray, ECGSequence],
    lead_field: LeadField,
    beta_max: float = DEFAULT_BETA_MAX,
    n_lambdas: int = 20,
) -> NoiseEstimate:
    """Noise variance from the part of Y an L-curve ridge solve leaves unresolved.

    The ridge λ comes from the L-curve corner; the singular directions with
    s² > λ are taken as resolved, and the residual outside them, divided by
    T·(m − resolved), estimates σ².
    """
    Y = _ecg_matrix(Y)
    H = lead_field.H
    m = H.shape[0]
    if Y.ndim != 2 or Y.shape[0] != m:
        raise InvalidArgumentException(f"Y must have {m} rows, got shape {Y.shape}")
    if not np.any(Y):
        raise EstimationException("cannot estimate noise from an all-zero ECG")

    U_h, s, _ = np.linalg.svd(H, full_matrices=False)
    coefficients = U_h.T @ Y
    outside = max(float(np.sum(Y**2) - np.sum(coefficients**2)), 0.0)
    curve = l_curve(s, coefficients, outside, n_lambdas)
    lam = curve.selected

    resolved = int(np.sum(s**2 > lam))
    basis = U_h[:, :resolved]
    residual = Y - basis @ (basis.T @ Y)
    dof = m - resolved
    if dof == 0:
        logger.warning("every lead direction is resolved at λ=%.3g; β set to its cap", lam)
        return NoiseEstimate(lam, resolved, 0.0, beta_max)

    sigma2 = float(np.sum(residual**2)) / (Y.shape[1] * dof)
    beta = beta_max if sigma2 <= 1.0 / beta_max else 1.0 / sigma2
    return NoiseEstimate(lam, resolved, sigma2, beta)


def estimate_beta(
    Y: Union[np.ndarray, ECGSequence],
    lead_field: LeadField,
    override: Optional[float] = None,
    beta_max: float = DEFAULT_BETA_MAX,
) -> float:
    """Noise precision for the measurement model; an override wins."""
    if override is not None:
        if not (np.isfinite(override) and override > 0):
            raise InvalidArgumentException(f"beta override must be positive, got {override}")
        return float(override)
    estimate = estimate_noise(Y, lead_field, beta_max=beta_max)
    logger.info(
        "β=%.4g (σ²=%.4g, λ=%.4g, %d resolved directions)",
        estimate.beta, estimate.sigma2, estimate.lambda_, estimate.resolved_rank,
    )
    return estimate.beta


def e_step(
    model: MeasurementModel, Y: Union[np.ndarray, ECGSequence], dec: DecoderOutput
) -> PosteriorU:
    """Column-wise Gaussian posterior of U given Y and the decoder's prior N(M, diag S).

    Each column is solved in the whitened lead space: with B = √β·H·diag(√S_k),
    K = I + BBᵀ is m × m, Û_k = M_k + √β·√S_k ⊙ Bᵀ K⁻¹ r_k and
    diag Σ̂_k = S_k ⊙ (1 − colsum((L⁻¹B)²)) for the Cholesky factor L of K.
    """
    Y = _ecg_matrix(Y)
    H = model.lead_field.H
    beta = model.beta
    M, S = dec.M, dec.S
    m, n = H.shape
    if M.shape[0] != n or Y.shape[0] != m or Y.shape[1] != M.shape[1]:
        raise InvalidArgumentException(
            f"shapes disagree: H {H.shape}, Y {Y.shape}, decoder {M.shape}"
        )
    T = M.shape[1]

    if beta == 0:
        return PosteriorU(M.copy(), S.copy(), np.zeros(T))

    root_beta = np.sqrt(beta)
    U_hat = np.empty_like(M)
    Sigma = np.empty_like(S)
    log_evidence = np.empty(T)
    identity = np.eye(m)
    for k in range(T):
        d = S[:, k]
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(M[:, k]))):
            raise SolverException(f"non-finite prior in column {k}", column=k)
        sd = np.sqrt(d)
        B = root_beta * H * sd
        try:
            L = linalg.cholesky(identity + B @ B.T, lower=True)
        except linalg.LinAlgError as e:
            raise SolverException(f"precision matrix is not positive definite in column {k}", column=k) from e

        r = Y[:, k] - H @ M[:, k]
        w = linalg.solve_triangular(L, r, lower=True)
        K_inv_r = linalg.solve_triangular(L, w, lower=True, trans="T")
        U_hat[:, k] = M[:, k] + root_beta * sd * (B.T @ K_inv_r)

        W = linalg.solve_triangular(L, B, lower=True)
        shrink = 1.0 - np.sum(W**2, axis=0)
        Sigma[:, k] = np.maximum(d * shrink, np.finfo(np.float64).tiny)

        log_det = 2.0 * np.sum(np.log(np.diag(L))) - m * np.log(beta)
        log_evidence[k] = -0.5 * (m * LOG_2PI + log_det + beta * float(w @ w))

    return PosteriorU(U_hat, Sigma, log_evidence)


def expected_log_joint(
    dec: DecoderOutput, post: PosteriorU, Z: np.ndarray, zprior: ZPrior
) -> float:
    """E_q[log p(U|Z)] + log p(Z) with the expectation under the column posteriors."""
    spread = (post.U_hat - dec.M) ** 2 + post.Sigma_diag
    likelihood = -0.5 * (LOG_2PI + np.log(dec.S)) - spread / (2.0 * dec.S)
    prior = -0.5 * (LOG_2PI + np.log(zprior.C)) - (Z - zprior.Z_bar) ** 2 / (2.0 * zprior.C)
    return float(np.sum(likelihood) + np.sum(prior))


def m_step_objective(
    Z: np.ndarray, post: PosteriorU, weights: VAEWeights, zprior: ZPrior
) -> float:
    return expected_log_joint(decode(weights, Z), post, Z, zprior)


def m_step_gradient(
    Z: np.ndarray, post: PosteriorU, weights: VAEWeights, zprior: ZPrior
) -> Tuple[float, np.ndarray]:
    """Objective and its gradient w.r.t. Z through the decoder."""
    dec, tape = decoder_forward(weights, Z)
    value = expected_log_joint(dec, post, Z, zprior)
    spread = (post.U_hat - dec.M) ** 2 + post.Sigma_diag
    dM = (post.U_hat - dec.M) / dec.S
    dS = spread / (2.0 * dec.S**2) - 0.5 / dec.S
    dZ, _ = decoder_backward(weights, tape, dM, dS)
    dZ = dZ - (Z - zprior.Z_bar) / zprior.C
    return value, dZ


@dataclass(frozen=True)
class MStepOutcome:
    Z: np.ndarray
    objective: float
    steps: Tuple[float, ...]


def m_step_update(
    Z: np.ndarray,
    post: PosteriorU,
    weights: VAEWeights,
    zprior: ZPrior,
    config: EMConfig,
) -> MStepOutcome:
    """Gradient ascent on the expected log joint with backtracking.

    Every accepted step does not decrease the objective; a step that finds no
    improvement within max_backtracks halvings ends the update with Z unchanged.
    """
    Z = np.array(Z, dtype=np.float64)
    current = None
    steps = []
    step_size = config.m_step_lr
    for _ in range(config.m_step_grad_steps):
        value, grad = m_step_gradient(Z, post, weights, zprior)
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise NonFiniteException(
                "non-finite M-step objective or gradient",
                {"objective": value, "grad_finite": bool(np.all(np.isfinite(grad)))},
            )
        current = value
        if not steps:
            steps.append(value)

        accepted = False
        trial = step_size
        for _ in range(config.max_backtracks):
            candidate = Z + trial * grad
            candidate_value = m_step_objective(candidate, post, weights, zprior)
            if np.isfinite(candidate_value) and candidate_value >= current:
                accepted = True
                break
            trial *= config.backtracking_factor
        if not accepted:
            break
        Z = candidate
        current = candidate_value
        steps.append(candidate_value)
        step_size = trial * 2.0

    return MStepOutcome(Z, float(current), tuple(steps))


def log_prior_density(Z: np.ndarray, zprior: ZPrior) -> np.ndarray:
    """log N(Z; Z̄, diag C), summed over each latent sequence of a (…, d, T) stack."""
    quadratic = (Z - zprior.Z_bar) ** 2 / zprior.C
    return -0.5 * np.sum(LOG_2PI + np.log(zprior.C) + quadratic, axis=(-2, -1))


def initial_latent(
    model: MeasurementModel,
    Y: Union[np.ndarray, ECGSequence],
    weights: VAEWeights,
    zprior: ZPrior,
    mode: ZInitMode = ZInitMode.PRIOR_MEAN,
) -> np.ndarray:
    """Starting Z for EM.

    prior-mean starts at Z̄. best-anchor scores Z̄ and every anchor of the prior
    by log p(Y|Z) + log p(Z), where p(Y|Z) is the evidence of the E-step under
    the decoded Gaussian, and returns the highest; ties keep the earlier
    candidate, Z̄ first.
    """
    if mode is ZInitMode.PRIOR_MEAN:
        return zprior.Z_bar.copy()
    if zprior.anchors is None:
        logger.warning("Z prior carries no anchors; starting from Z̄")
        return zprior.Z_bar.copy()

    Y = _ecg_matrix(Y)
    candidates = np.concatenate([zprior.Z_bar[None], zprior.anchors])
    decoded = decode(weights, candidates)
    scores = log_prior_density(candidates, zprior)
    for i in range(len(candidates)):
        post = e_step(model, Y, DecoderOutput(decoded.M[i], decoded.S[i]))
        scores[i] += float(np.sum(post.log_evidence_terms))
    best = int(np.argmax(scores))
    logger.info(
        "EM start: %s (score %.6g over %d candidates)",
        "Z̄" if best == 0 else f"anchor {best - 1}", scores[best], len(candidates),
    )
    return candidates[best].copy()


def _check_compatible(model: MeasurementModel, Y: np.ndarray, weights: VAEWeights, zprior: ZPrior):
    if weights.config.n_nodes != model.lead_field.node_count:
        raise ConfigurationException(
            f"decoder has {weights.config.n_nodes} nodes, lead field {model.lead_field.node_count}"
        )
    if zprior.latent_dim != weights.config.latent_dim:
        raise ConfigurationException(
            f"Z prior latent dimension {zprior.latent_dim} does not match the decoder's "
            f"{weights.config.latent_dim}"
        )
    if Y.shape[1] != zprior.column_count:
        raise ConfigurationException(
            f"ECG has {Y.shape[1]} columns but the Z prior covers {zprior.column_count}"
        )


def em_infer(
    model: MeasurementModel,
    Y: Union[np.ndarray, ECGSequence],
    weights: VAEWeights,
    zprior: ZPrior,
    config: EMConfig = EMConfig(),
) -> EMResult:
    """Alternate E-steps and M-steps from the configured start until the objective settles."""
    Y = _ecg_matrix(Y)
    _check_compatible(model, Y, weights, zprior)

    Z = initial_latent(model, Y, weights, zprior, config.z_init)
    trace = []
    converged = False
    for iteration in range(1, config.max_em_iters + 1):
        post = e_step(model, Y, decode(weights, Z))
        outcome = m_step_update(Z, post, weights, zprior, config)
        Z = outcome.Z
        before, after = outcome.steps[0], outcome.objective
        trace.append(EMIteration(iteration, before, after, outcome.steps))
        change = abs(after - before) / max(abs(before), 1e-12)
        logger.debug("EM %d: L %.6g → %.6g (rel change %.3g)", iteration, before, after, change)
        if change < config.rel_tol:
            converged = True
            break

    posterior = e_step(model, Y, decode(weights, Z))
    logger.info(
        "EM %s after %d iteration(s), L=%.6g",
        "converged" if converged else "stopped", len(trace), trace[-1].l_after,
    )
    return EMResult(LatentSequence(Z), posterior, tuple(trace), converged, model.beta)
