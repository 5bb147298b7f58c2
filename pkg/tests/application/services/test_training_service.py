"""Tests for TrainingApplicationService."""

import hashlib

import pytest

from ecgi.application import ApplicationException, TrainingApplicationService
from ecgi.application.dtos import VAEConfigFile


@pytest.fixture
def training_service(artifacts, corpora):
    return TrainingApplicationService(artifacts, corpora)


@pytest.fixture
def vae_request():
    return VAEConfigFile(
        latent_dim=3,
        encoder_hidden=(5, 4),
        decoder_hidden=(4, 5),
        epochs=2,
        batch_size=2,
        val_fraction=0.25,
    )


@pytest.fixture
def trained(training_service, corpus_dir, vae_request, tmp_path):
    path = tmp_path / "weights.ntc"
    training_service.train(corpus_dir, vae_request, path)
    return path


class TestTrain:
    """Test suite for TrainingApplicationService.train."""

    def test_train_writes_weights(self, training_service, artifacts, corpus_dir, vae_request, tmp_path):
        """Weights carry the config, the corpus hash and the per-epoch log."""
        # Arrange
        out = tmp_path / "weights.ntc"

        # Act
        response = training_service.train(corpus_dir, vae_request, out, plot_dir=tmp_path / "plots")

        # Assert
        assert (response.train_count, response.val_count) == (3, 1)
        assert [epoch.epoch for epoch in response.epochs] == [1, 2]
        assert all(epoch.val_elbo is not None for epoch in response.epochs)
        expected_hash = hashlib.sha256((corpus_dir / "manifest.json").read_bytes()).hexdigest()
        assert response.corpus_hash == expected_hash
        weights = artifacts.load_weights(out)
        assert weights.config.n_nodes == 32
        assert weights.config.latent_dim == 3
        assert weights.metadata["columns"] == 20
        assert weights.metadata["corpus_manifest_sha256"] == expected_hash
        assert (tmp_path / "plots" / "training_curve.png").is_file()

    def test_missing_corpus(self, training_service, vae_request, tmp_path):
        """Training needs a corpus manifest."""
        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            training_service.train(tmp_path, vae_request, tmp_path / "weights.ntc")

        assert "no corpus manifest" in str(exc_info.value)


class TestPriorAndSampling:
    """Test suite for estimate_prior and sample."""

    def test_estimate_prior(self, training_service, artifacts, trained, corpus_dir, tmp_path):
        """The Z prior matches the latent size and sequence length."""
        # Act
        response = training_service.estimate_prior(trained, corpus_dir, tmp_path / "zprior.ntc")

        # Assert
        assert (response.latent_dim, response.column_count) == (3, 20)
        assert response.mean_variance > 0
        assert artifacts.load_zprior(tmp_path / "zprior.ntc").C.shape == (3, 20)

    def test_sample_from_prior(self, training_service, trained, corpus_dir, tmp_path):
        """With a prior file the draws come from it and can be plotted."""
        # Arrange
        prior = tmp_path / "zprior.ntc"
        training_service.estimate_prior(trained, corpus_dir, prior)

        # Act
        response = training_service.sample(trained, 2, prior, plot_dir=tmp_path / "plots")

        # Assert
        assert response.source == "zprior"
        assert 0.0 <= response.plausible_fraction <= 1.0
        assert (tmp_path / "plots" / "samples_zprior.png").is_file()

    def test_isotropic_sample_uses_training_length(self, training_service, trained):
        """Without a prior the sequence length comes from the training record."""
        # Act
        response = training_service.sample(trained, 3)

        # Assert
        assert response.count == 3
        assert response.source == "isotropic"
        assert response.plot is None

    def test_isotropic_sample_without_length(self, training_service, artifacts, tiny_weights, tmp_path):
        """Untrained weights have no recorded length to sample."""
        # Arrange
        path = tmp_path / "weights.ntc"
        artifacts.save_weights(path, tiny_weights)

        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            training_service.sample(path, 2)

        assert "columns" in str(exc_info.value)
