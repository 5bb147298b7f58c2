"""Tests for InversionApplicationService."""

import numpy as np
import pytest
from pydantic import ValidationError

from ecgi.application import ApplicationException, InversionApplicationService
from ecgi.application.dtos import EMConfigFile
from ecgi.domain import ECGSequence, EMConfig, MeasurementModel, ZInitMode, ZPrior
from ecgi.domain.services import decode, em_infer


@pytest.fixture
def inversion_service(artifacts):
    return InversionApplicationService(artifacts)


@pytest.fixture
def model_files(tmp_path, artifacts, tiny_weights, zprior, test_cases):
    """Weights, Z prior and one case ECG saved as containers."""
    paths = {
        "weights": tmp_path / "weights.ntc",
        "zprior": tmp_path / "zprior.ntc",
        "ecg": tmp_path / "ecg.ntc",
    }
    artifacts.save_weights(paths["weights"], tiny_weights)
    artifacts.save_zprior(paths["zprior"], zprior)
    artifacts.save_ecg(paths["ecg"], test_cases[0].ecg)
    return paths


class TestInversionApplicationService:
    """Test suite for reconstruct and infer."""

    def test_infer_writes_reconstruction(self, inversion_service, artifacts, model_files, geometry_bundle, tmp_path):
        """Û, diag Σ̂, Ẑ and the objective trace are written together."""
        # Arrange
        out = tmp_path / "recon.ntc"
        request = EMConfigFile(max_em_iters=3, beta=50.0)

        # Act
        response = inversion_service.infer(
            model_files["ecg"], model_files["weights"], model_files["zprior"], geometry_bundle, out, request
        )

        # Assert
        assert response.beta == 50.0
        assert 1 <= response.iterations <= 3
        assert response.path == str(out)
        assert response.U_hat is None
        contents = artifacts.load_reconstruction(out)
        assert contents.tensors["U_hat"].shape == (32, 20)
        assert contents.tensors["Sigma_diag"].shape == (32, 20)
        assert contents.tensors["Z_hat"].shape == (3, 20)
        np.testing.assert_allclose(contents.tensors["L_trace"], response.objective_trace)
        assert contents.metadata["method"] == "proposed"

    def test_estimated_beta(self, inversion_service, lead_field, tiny_weights, zprior, test_cases):
        """Without a configured β the recording sets it, capped by beta_max."""
        # Act
        result = inversion_service.reconstruct(
            test_cases[1].ecg, lead_field, tiny_weights, zprior, EMConfigFile(max_em_iters=2, beta_max=1e4)
        )

        # Assert
        assert 0 < result.beta <= 1e4

    def test_response_with_estimate(self, inversion_service, lead_field, tiny_weights, zprior, test_cases):
        """Û can be returned inline."""
        # Arrange
        result = inversion_service.reconstruct(
            test_cases[0].ecg, lead_field, tiny_weights, zprior, EMConfigFile(max_em_iters=1, beta=10.0)
        )

        # Act
        response = inversion_service.to_response(result, include_estimate=True)

        # Assert
        assert np.asarray(response.U_hat).shape == (32, 20)

    def test_best_anchor_start(self, inversion_service, lead_field, tiny_weights, zprior):
        """z_init "best-anchor" reaches em_infer as the anchor search."""
        # Arrange
        anchors = np.random.default_rng(5).normal(0.0, 2.0, size=(2, 3, 20))
        anchored = ZPrior(zprior.Z_bar, zprior.C, anchors=anchors)
        ecg = ECGSequence(lead_field.project(decode(tiny_weights, anchors[0]).M))
        request = EMConfigFile(max_em_iters=2, beta=1e3, z_init="best-anchor")

        # Act
        result = inversion_service.reconstruct(ecg, lead_field, tiny_weights, anchored, request)

        # Assert
        expected = em_infer(
            MeasurementModel(lead_field, 1e3), ecg, tiny_weights, anchored,
            EMConfig(max_em_iters=2, z_init=ZInitMode.BEST_ANCHOR),
        )
        np.testing.assert_array_equal(result.posterior.U_hat, expected.posterior.U_hat)

    def test_unknown_start_rejected(self):
        """Only the two starting modes are accepted."""
        # Act & Assert
        with pytest.raises(ValidationError) as exc_info:
            EMConfigFile(z_init="random")

        assert "z_init" in str(exc_info.value)

    def test_prior_length_mismatch(self, inversion_service, lead_field, tiny_weights, test_cases):
        """A Z prior shorter than the recording is a configuration error."""
        # Arrange
        short = ZPrior(np.zeros((3, 19)), np.ones((3, 19)))

        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            inversion_service.reconstruct(test_cases[0].ecg, lead_field, tiny_weights, short)

        assert "Z prior covers 19" in str(exc_info.value)

    def test_missing_weights(self, inversion_service, model_files, geometry_bundle, tmp_path):
        """Unreadable inputs are reported before any computation."""
        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            inversion_service.infer(
                model_files["ecg"], tmp_path / "absent.ntc", model_files["zprior"],
                geometry_bundle, tmp_path / "recon.ntc",
            )

        assert "no container" in str(exc_info.value)
