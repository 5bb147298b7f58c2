"""Unit tests for noise estimation, the E-step, the M-step and EM inference."""

import logging

import numpy as np
import pytest
from scipy import stats

from ecgi.domain import (
    ConfigurationException,
    DecoderOutput,
    EMConfig,
    EstimationException,
    InvalidArgumentException,
    LeadField,
    MeasurementModel,
    PosteriorU,
    ZInitMode,
    ZPrior,
)
from ecgi.domain.services import (
    decode,
    e_step,
    em_infer,
    estimate_beta,
    estimate_noise,
    expected_log_joint,
    grad_check,
    initial_latent,
    log_prior_density,
    m_step_gradient,
    m_step_objective,
    m_step_update,
)


@pytest.fixture
def rank_two_lead_field():
    """Six leads spanning two zero-mean directions over three nodes."""
    q, _ = np.linalg.qr(np.random.default_rng(2).normal(size=(6, 2)))
    rows = np.array([[1.0, -1.0, 0.0], [1.0, 1.0, -2.0]])
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    return LeadField(q @ rows)


@pytest.fixture
def random_prior(lead_field):
    rng = np.random.default_rng(4)
    n = lead_field.node_count
    return DecoderOutput(rng.normal(size=(n, 6)), rng.uniform(0.1, 2.0, size=(n, 6)))


@pytest.fixture
def memoryless_weights(tiny_weights):
    """tiny_weights with the decoder's recurrence and forget gates switched off."""
    weights = tiny_weights.copy()
    for layer in ("decoder.lstm1", "decoder.lstm2"):
        W, b = weights[f"{layer}.W"], weights[f"{layer}.b"]
        hidden = b.size // 4
        W[:, W.shape[1] - hidden:] = 0.0
        W[hidden:2 * hidden] = 0.0
        b[hidden:2 * hidden] = -1e3
    return weights


def _marginal_objective(model, Y, weights, zprior, Z):
    post = e_step(model, Y, decode(weights, Z))
    return float(np.sum(post.log_evidence_terms)) + float(log_prior_density(Z, zprior))


class TestEstimateNoise:
    """Test suite for estimate_noise and estimate_beta."""

    def test_noiseless_signal_hits_cap(self, rank_two_lead_field):
        """Y inside the resolved range leaves no residual, so β is capped."""
        # Arrange
        U = np.random.default_rng(0).normal(size=(3, 40))
        Y = rank_two_lead_field.H @ U

        # Act
        estimate = estimate_noise(Y, rank_two_lead_field)

        # Assert
        assert estimate.resolved_rank == 2
        assert estimate.beta == 1e8

    def test_recovers_noise_variance(self, rank_two_lead_field):
        """Noise outside the resolved directions estimates σ² within 15%."""
        # Arrange
        rng = np.random.default_rng(1)
        Y = rank_two_lead_field.H @ rng.normal(size=(3, 400)) + rng.normal(0.0, 0.1, size=(6, 400))

        # Act
        estimate = estimate_noise(Y, rank_two_lead_field)

        # Assert
        assert estimate.resolved_rank == 2
        assert estimate.sigma2 == pytest.approx(0.01, rel=0.15)
        assert estimate.beta == pytest.approx(1.0 / estimate.sigma2)

    def test_override_wins(self, lead_field):
        """An explicit β is returned untouched."""
        # Act & Assert
        assert estimate_beta(np.zeros((12, 3)), lead_field, override=50.0) == 50.0

    @pytest.mark.parametrize("override", [0.0, -1.0, float("inf")])
    def test_invalid_override(self, lead_field, override):
        """Overrides must be finite and positive."""
        # Act & Assert
        with pytest.raises(InvalidArgumentException) as exc_info:
            estimate_beta(np.ones((12, 3)), lead_field, override=override)

        assert "positive" in str(exc_info.value)

    def test_all_zero_ecg(self, lead_field):
        """There is no noise level to read from a flat ECG."""
        # Act & Assert
        with pytest.raises(EstimationException) as exc_info:
            estimate_beta(np.zeros((12, 5)), lead_field)

        assert "all-zero" in str(exc_info.value)

    def test_row_count_checked(self, lead_field):
        """Y must have one row per lead."""
        # Act & Assert
        with pytest.raises(InvalidArgumentException):
            estimate_noise(np.ones((11, 5)), lead_field)


class TestEStep:
    """Test suite for e_step."""

    def test_identity_operator_by_hand(self):
        """H = I, β = 1 and a unit prior halve the data and the variance."""
        # Arrange
        model = MeasurementModel(LeadField(np.eye(2), require_centered=False), beta=1.0)
        prior = DecoderOutput(np.zeros((2, 1)), np.ones((2, 1)))
        Y = np.array([[2.0], [4.0]])

        # Act
        post = e_step(model, Y, prior)

        # Assert
        np.testing.assert_allclose(post.U_hat, [[1.0], [2.0]])
        np.testing.assert_allclose(post.Sigma_diag, [[0.5], [0.5]])

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_dense_posterior(self, seed):
        """Mean and variance equal the n × n precision-form solution on random small problems."""
        # Arrange
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 13))
        m = int(rng.integers(1, 9))
        T = int(rng.integers(1, 6))
        H = rng.normal(size=(m, n))
        M = rng.normal(size=(n, T))
        S = rng.uniform(0.1, 2.0, size=(n, T))
        beta = float(rng.uniform(0.5, 5.0))
        Y = rng.normal(size=(m, T))
        model = MeasurementModel(LeadField(H, require_centered=False), beta)

        # Act
        post = e_step(model, Y, DecoderOutput(M, S))

        # Assert
        for k in range(T):
            covariance = np.linalg.inv(beta * H.T @ H + np.diag(1.0 / S[:, k]))
            mean = covariance @ (beta * H.T @ Y[:, k] + M[:, k] / S[:, k])
            variance = np.diag(covariance)
            assert np.linalg.norm(post.U_hat[:, k] - mean) <= 1e-10 * np.linalg.norm(mean)
            assert np.linalg.norm(post.Sigma_diag[:, k] - variance) <= 1e-10 * np.linalg.norm(variance)

    def test_log_evidence_is_marginal_likelihood(self, lead_field, random_prior):
        """Per-column terms are log N(y; H M, H S Hᵀ + I/β)."""
        # Arrange
        beta = 20.0
        H = lead_field.H
        Y = np.random.default_rng(9).normal(size=(12, 6))

        # Act
        post = e_step(MeasurementModel(lead_field, beta), Y, random_prior)

        # Assert
        for k in range(6):
            cov = H @ np.diag(random_prior.S[:, k]) @ H.T + np.eye(12) / beta
            expected = stats.multivariate_normal.logpdf(Y[:, k], H @ random_prior.M[:, k], cov)
            assert post.log_evidence_terms[k] == pytest.approx(expected, rel=1e-8)

    def test_zero_precision_returns_prior(self, lead_field, random_prior):
        """β = 0 ignores the data."""
        # Act
        post = e_step(MeasurementModel(lead_field, 0.0), np.ones((12, 6)), random_prior)

        # Assert
        np.testing.assert_array_equal(post.U_hat, random_prior.M)
        np.testing.assert_array_equal(post.Sigma_diag, random_prior.S)

    def test_posterior_variance_shrinks(self, lead_field, random_prior):
        """Observing data never increases the variance."""
        # Act
        post = e_step(MeasurementModel(lead_field, 100.0), np.zeros((12, 6)), random_prior)

        # Assert
        assert np.all(post.Sigma_diag <= random_prior.S * (1 + 1e-12))
        assert np.all(post.Sigma_diag > 0)

    def test_shape_mismatch(self, lead_field, random_prior):
        """ECG and decoder must cover the same columns."""
        # Act & Assert
        with pytest.raises(InvalidArgumentException) as exc_info:
            e_step(MeasurementModel(lead_field, 1.0), np.ones((12, 5)), random_prior)

        assert "shapes disagree" in str(exc_info.value)


class TestMStep:
    """Test suite for expected_log_joint and the M-step."""

    def test_expected_log_joint_is_node_order_invariant(self, random_prior, zprior):
        """Relabelling nodes consistently leaves the objective unchanged."""
        # Arrange
        rng = np.random.default_rng(6)
        n = random_prior.M.shape[0]
        post = PosteriorU(rng.normal(size=(n, 6)), rng.uniform(0.1, 1.0, size=(n, 6)), np.zeros(6))
        Z = zprior.Z_bar[:, :6]
        prior6 = ZPrior(zprior.Z_bar[:, :6].copy(), zprior.C[:, :6].copy())
        perm = rng.permutation(n)

        # Act
        original = expected_log_joint(random_prior, post, Z, prior6)
        permuted = expected_log_joint(
            DecoderOutput(random_prior.M[perm], random_prior.S[perm]),
            PosteriorU(post.U_hat[perm], post.Sigma_diag[perm], post.log_evidence_terms),
            Z,
            prior6,
        )

        # Assert
        assert permuted == pytest.approx(original, rel=1e-12)

    def test_objective_matches_monte_carlo(self, tiny_weights, zprior):
        """L equals the average complete log joint over 10⁵ posterior draws of U to 0.5%."""
        # Arrange
        rng = np.random.default_rng(12)
        n, T = tiny_weights.config.n_nodes, zprior.column_count
        post = PosteriorU(rng.normal(size=(n, T)), rng.uniform(0.1, 1.0, size=(n, T)), np.zeros(T))
        dec = decode(tiny_weights, zprior.Z_bar)
        draws, chunk = 100_000, 10_000
        total = 0.0
        for _ in range(draws // chunk):
            U = post.U_hat + np.sqrt(post.Sigma_diag) * rng.standard_normal((chunk, n, T))
            total += float(np.sum(stats.norm.logpdf(U, dec.M, np.sqrt(dec.S))))
        log_prior = float(np.sum(stats.norm.logpdf(zprior.Z_bar, zprior.Z_bar, np.sqrt(zprior.C))))

        # Act
        value = m_step_objective(zprior.Z_bar, post, tiny_weights, zprior)

        # Assert
        assert value == pytest.approx(total / draws + log_prior, rel=5e-3)

    def test_objective_is_time_order_invariant(self, memoryless_weights, zprior):
        """With a decoder that keeps no state across columns, permuting columns leaves L unchanged."""
        # Arrange
        rng = np.random.default_rng(13)
        n, T = memoryless_weights.config.n_nodes, zprior.column_count
        post = PosteriorU(rng.normal(size=(n, T)), rng.uniform(0.1, 1.0, size=(n, T)), np.zeros(T))
        Z = zprior.Z_bar + rng.normal(0.0, 0.3, size=zprior.Z_bar.shape)
        perm = rng.permutation(T)
        shuffled_prior = ZPrior(zprior.Z_bar[:, perm], zprior.C[:, perm])
        shuffled_post = PosteriorU(post.U_hat[:, perm], post.Sigma_diag[:, perm], post.log_evidence_terms[perm])

        # Act
        original = m_step_objective(Z, post, memoryless_weights, zprior)
        permuted = m_step_objective(Z[:, perm], shuffled_post, memoryless_weights, shuffled_prior)

        # Assert
        np.testing.assert_allclose(
            decode(memoryless_weights, Z[:, perm]).M, decode(memoryless_weights, Z).M[:, perm], rtol=1e-12
        )
        assert permuted == pytest.approx(original, rel=1e-12)

    def test_gradient_matches_finite_differences(self, tiny_weights, zprior, lead_field, test_cases):
        """∂L/∂Z through the decoder agrees with central differences."""
        # Arrange
        model = MeasurementModel(lead_field, 100.0)
        post = e_step(model, test_cases[0].ecg, decode(tiny_weights, zprior.Z_bar))
        params = {"Z": zprior.Z_bar.copy()}

        def objective(p):
            value, dZ = m_step_gradient(p["Z"], post, tiny_weights, zprior)
            return value, {"Z": dZ}

        # Act
        report = grad_check(objective, params, tolerance=1e-5)

        # Assert
        assert report.passed, report
        value, _ = m_step_gradient(zprior.Z_bar, post, tiny_weights, zprior)
        assert value == pytest.approx(m_step_objective(zprior.Z_bar, post, tiny_weights, zprior))

    def test_update_never_decreases_objective(self, tiny_weights, zprior, lead_field, test_cases):
        """Every accepted backtracked step keeps L non-decreasing."""
        # Arrange
        model = MeasurementModel(lead_field, 100.0)
        post = e_step(model, test_cases[1].ecg, decode(tiny_weights, zprior.Z_bar))

        # Act
        outcome = m_step_update(zprior.Z_bar, post, tiny_weights, zprior, EMConfig(m_step_grad_steps=8))

        # Assert
        assert np.all(np.diff(outcome.steps) >= -1e-9)
        assert outcome.objective >= outcome.steps[0]
        assert outcome.objective == pytest.approx(
            m_step_objective(outcome.Z, post, tiny_weights, zprior)
        )


class TestInitialLatent:
    """Test suite for initial_latent and log_prior_density."""

    @pytest.fixture
    def anchored_prior(self, zprior):
        """Flat prior around Z̄ = 0 with three well-separated anchors."""
        rng = np.random.default_rng(21)
        shape = zprior.Z_bar.shape
        return ZPrior(np.zeros(shape), np.full(shape, 100.0), anchors=rng.normal(0.0, 2.0, size=(3,) + shape))

    def test_prior_mean_start(self, tiny_weights, zprior, lead_field):
        """The default start is a copy of Z̄."""
        # Act
        Z = initial_latent(MeasurementModel(lead_field, 10.0), np.zeros((12, 20)), tiny_weights, zprior)

        # Assert
        np.testing.assert_array_equal(Z, zprior.Z_bar)
        assert Z is not zprior.Z_bar

    def test_best_anchor_finds_generating_sequence(self, tiny_weights, anchored_prior, lead_field):
        """An ECG produced by an anchor's decoded mean selects that anchor."""
        # Arrange
        Y = lead_field.project(decode(tiny_weights, anchored_prior.anchors[1]).M)
        model = MeasurementModel(lead_field, 1e4)

        # Act
        Z = initial_latent(model, Y, tiny_weights, anchored_prior, ZInitMode.BEST_ANCHOR)

        # Assert
        np.testing.assert_array_equal(Z, anchored_prior.anchors[1])

    def test_best_anchor_without_anchors_uses_prior_mean(self, tiny_weights, zprior, lead_field, caplog):
        """A prior with no anchors falls back to Z̄ and says so."""
        # Act
        with caplog.at_level(logging.WARNING, logger="ecgi.domain.services.inversion"):
            Z = initial_latent(
                MeasurementModel(lead_field, 10.0), np.zeros((12, 20)), tiny_weights, zprior, ZInitMode.BEST_ANCHOR
            )

        # Assert
        np.testing.assert_array_equal(Z, zprior.Z_bar)
        assert "no anchors" in caplog.text

    def test_em_starts_from_best_anchor(self, tiny_weights, anchored_prior, lead_field):
        """em_infer's first M-step begins at the selected anchor."""
        # Arrange
        Y = lead_field.project(decode(tiny_weights, anchored_prior.anchors[2]).M)
        model = MeasurementModel(lead_field, 1e4)
        config = EMConfig(max_em_iters=1, z_init=ZInitMode.BEST_ANCHOR)

        # Act
        result = em_infer(model, Y, tiny_weights, anchored_prior, config)

        # Assert
        post = e_step(model, Y, decode(tiny_weights, anchored_prior.anchors[2]))
        assert result.trace[0].l_before == pytest.approx(
            m_step_objective(anchored_prior.anchors[2], post, tiny_weights, anchored_prior)
        )

    def test_log_prior_density_per_sequence(self, zprior):
        """A stack of latent sequences scores each one with the per-entry Gaussian."""
        # Arrange
        stack = np.stack([zprior.Z_bar, zprior.Z_bar + 1.0])

        # Act
        scores = log_prior_density(stack, zprior)

        # Assert
        expected = [
            float(np.sum(stats.norm.logpdf(Z, zprior.Z_bar, np.sqrt(zprior.C)))) for Z in stack
        ]
        np.testing.assert_allclose(scores, expected, rtol=1e-12)


class TestEmInfer:
    """Test suite for em_infer."""

    def test_reconstructs_full_sequence(self, tiny_weights, zprior, lead_field, test_cases):
        """The result carries Z, the posterior of U and the fixed β."""
        # Arrange
        model = MeasurementModel(lead_field, 100.0)

        # Act
        result = em_infer(model, test_cases[0].ecg, tiny_weights, zprior, EMConfig(max_em_iters=3))

        # Assert
        assert result.Z_map.Z.shape == (3, 20)
        assert result.posterior.U_hat.shape == (32, 20)
        assert result.beta == 100.0
        assert 1 <= len(result.trace) <= 3
        assert len(result.objective_trace) == len(result.trace)

    def test_monotone_within_each_m_step(self, tiny_weights, zprior, lead_field, test_cases):
        """L never drops along the steps of any M-step."""
        # Arrange
        model = MeasurementModel(lead_field, 100.0)

        # Act
        result = em_infer(model, test_cases[2].ecg, tiny_weights, zprior, EMConfig(max_em_iters=4))

        # Assert
        for iteration in result.trace:
            assert np.all(np.diff(iteration.l_steps) >= -1e-9)
            assert iteration.l_after >= iteration.l_before - 1e-9

    @pytest.mark.parametrize("run", range(10))
    def test_marginal_objective_never_decreases(self, tiny_weights, zprior, lead_field, test_cases, run):
        """log p(Y|Z) + log p(Z) does not drop from one EM iteration to the next."""
        # Arrange
        rng = np.random.default_rng(run)
        case = test_cases[run % len(test_cases)]
        Y = case.ecg.Y + rng.normal(0.0, 0.01, size=case.ecg.Y.shape)
        model = MeasurementModel(lead_field, float(rng.uniform(50.0, 500.0)))
        iterates = [zprior.Z_bar]

        # Act
        for iterations in range(1, 5):
            result = em_infer(model, Y, tiny_weights, zprior, EMConfig(max_em_iters=iterations, rel_tol=1e-12))
            iterates.append(result.Z_map.Z)
            for iteration in result.trace:
                assert np.all(np.diff(iteration.l_steps) >= -1e-9)
        marginals = [_marginal_objective(model, Y, tiny_weights, zprior, Z) for Z in iterates]

        # Assert
        for before, after in zip(marginals, marginals[1:]):
            assert after >= before - 1e-9 * max(1.0, abs(before))

    def test_loose_tolerance_stops_after_one_iteration(self, tiny_weights, zprior, lead_field, test_cases):
        """An infinite tolerance converges immediately."""
        # Arrange
        model = MeasurementModel(lead_field, 100.0)

        # Act
        result = em_infer(model, test_cases[0].ecg, tiny_weights, zprior, EMConfig(rel_tol=float("inf")))

        # Assert
        assert result.converged
        assert len(result.trace) == 1

    def test_deterministic(self, tiny_weights, zprior, lead_field, test_cases):
        """Same inputs, same reconstruction."""
        # Arrange
        model = MeasurementModel(lead_field, 100.0)
        config = EMConfig(max_em_iters=2)

        # Act
        first = em_infer(model, test_cases[0].ecg, tiny_weights, zprior, config)
        second = em_infer(model, test_cases[0].ecg, tiny_weights, zprior, config)

        # Assert
        np.testing.assert_array_equal(first.posterior.U_hat, second.posterior.U_hat)

    def test_column_mismatch(self, tiny_weights, zprior, lead_field):
        """The ECG must be as long as the Z prior."""
        # Act & Assert
        with pytest.raises(ConfigurationException) as exc_info:
            em_infer(MeasurementModel(lead_field, 1.0), np.ones((12, 19)), tiny_weights, zprior)

        assert "19 columns" in str(exc_info.value)

    def test_node_count_mismatch(self, tiny_weights, zprior):
        """Decoder and lead field must describe the same heart."""
        # Arrange
        other = LeadField(np.zeros((12, 10)))

        # Act & Assert
        with pytest.raises(ConfigurationException):
            em_infer(MeasurementModel(other, 1.0), np.ones((12, 20)), tiny_weights, zprior)
