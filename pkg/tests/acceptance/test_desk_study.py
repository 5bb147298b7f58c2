"""Desk-scale study: train on the default 8×8×4 corpus and compare the methods on held-out cases."""

import time

import numpy as np
import pytest

from ecgi.application import ExperimentApplicationService
from ecgi.application.dtos import EMConfigFile, ExperimentConfig
from ecgi.domain import MeasurementModel, SettingTag, SVAEConfig
from ecgi.domain.services import (
    build_lattice_mesh,
    default_corpus_spec,
    detect_scar,
    em_infer,
    estimate_beta,
    estimate_z_prior,
    fibonacci_sphere_leads,
    generate_corpus,
    make_test_cases,
    plan_held_out,
    plausibility_fraction,
    reconstruction_rmse,
    sample_sequences,
    synthesize_lead_field,
    train,
)
from ecgi.infrastructure import ContainerArtifactRepository

SNR_DB = 25.0
RUNTIME_LIMIT_S = 30 * 60
METHODS = ["proposed", "greensite", "fixed-ep"]
SETTINGS = (SettingTag.UNSEEN_SCAR, SettingTag.UNSEEN_ORIGIN, SettingTag.UNSEEN_BOTH)


@pytest.fixture(scope="module")
def desk():
    """Default geometry, the 10 × 5 training corpus and the trained model with its Z prior."""
    started = time.perf_counter()
    mesh = build_lattice_mesh((8, 8, 4))
    lead_field = synthesize_lead_field(mesh, fibonacci_sphere_leads(mesh, 32))
    spec = default_corpus_spec(mesh)
    corpus = generate_corpus(mesh, spec)
    config = SVAEConfig(n_nodes=mesh.node_count, latent_dim=12)
    weights, log = train(corpus, config)
    zprior = estimate_z_prior(weights, corpus)
    return {
        "started": started,
        "mesh": mesh,
        "lead_field": lead_field,
        "spec": spec,
        "corpus": corpus,
        "weights": weights,
        "log": log,
        "zprior": zprior,
    }


@pytest.fixture(scope="module")
def study(desk, tmp_path_factory):
    """Every method on ten held-out cases per setting, EM started from the best anchor."""
    service = ExperimentApplicationService(ContainerArtifactRepository())
    config = ExperimentConfig(plots=False, em=EMConfigFile(z_init="best-anchor"))
    cases, summaries = {}, {}
    for setting in SETTINGS:
        held_out = plan_held_out(desk["mesh"], desk["spec"], setting, n_origins=5, n_scars=2)
        cases[setting] = make_test_cases(
            desk["mesh"], desk["lead_field"], held_out, SNR_DB, setting, desk["spec"]
        )
        summaries[setting] = service.run_experiment(
            setting.value, METHODS, cases[setting], tmp_path_factory.mktemp(setting.value), config,
            mesh=desk["mesh"], lead_field=desk["lead_field"], weights=desk["weights"], zprior=desk["zprior"],
        )
    return {"cases": cases, "summaries": summaries, "elapsed": time.perf_counter() - desk["started"]}


def _means(summary, metric):
    return {group.method: getattr(group, metric).mean for group in summary.groups}


@pytest.mark.slow
class TestDeskTraining:
    """Test suite for the VAE trained with default settings on the desk corpus."""

    def test_corpus_size(self, desk):
        """Ten origins × five scar configurations, 80 columns each."""
        # Assert
        assert len(desk["corpus"]) >= 50
        assert desk["corpus"].tmp_stack().shape[1:] == (256, 80)

    def test_elbo_rises(self, desk):
        """The final training ELBO beats the first epoch's."""
        # Assert
        elbo = desk["log"].train_elbo
        assert elbo[-1] > elbo[0]

    def test_reconstruction_rmse(self, desk):
        """Decoding the encoder mean reproduces the training TMP to RMSE < 0.15."""
        # Act
        rmse = reconstruction_rmse(desk["weights"], desk["corpus"])

        # Assert
        assert rmse < 0.15

    def test_prior_samples_are_plausible(self, desk):
        """Sequences decoded from the Z prior stay in the physiological band."""
        # Act
        samples = sample_sequences(desk["weights"], 50, np.random.default_rng(0), desk["zprior"])

        # Assert
        assert plausibility_fraction(samples) >= 0.95

    def test_em_ascent_on_ten_runs(self, desk, study):
        """Every backtracked M-step keeps L non-decreasing on ten desk inversions."""
        # Arrange
        cases = study["cases"][SettingTag.UNSEEN_SCAR][:10]

        # Act
        results = [
            em_infer(
                MeasurementModel(desk["lead_field"], estimate_beta(case.ecg, desk["lead_field"])),
                case.ecg, desk["weights"], desk["zprior"],
            )
            for case in cases
        ]

        # Assert
        assert len(results) == 10
        for result in results:
            for iteration in result.trace:
                assert np.all(np.diff(iteration.l_steps) >= -1e-9)


@pytest.mark.slow
class TestDeskStudy:
    """Test suite for the method comparison on held-out cases."""

    def test_every_case_scored(self, study):
        """At least ten cases per setting and no failed reconstructions."""
        # Assert
        for setting, summary in study["summaries"].items():
            assert len(study["cases"][setting]) >= 10
            assert summary.failures == 0

    def test_ground_truth_scar_detection_is_exact(self, study):
        """The scar rule recovers every true scar from the simulated TMP."""
        # Assert
        for cases in study["cases"].values():
            for case in cases:
                assert detect_scar(case.tmp_true) == set(case.scar_true)

    def test_proposed_nrmse_beats_greensite(self, study):
        """Unseen scars: proposed nrmse is below 0.6 and at least 0.2 below Greensite."""
        # Act
        nrmse = _means(study["summaries"][SettingTag.UNSEEN_SCAR], "nrmse")

        # Assert
        assert nrmse["proposed"] < 0.6
        assert nrmse["proposed"] <= nrmse["greensite"] - 0.2

    @pytest.mark.parametrize("setting", [SettingTag.UNSEEN_SCAR, SettingTag.UNSEEN_BOTH])
    def test_proposed_dice_beats_baselines(self, study, setting):
        """Scar settings: proposed mean Dice exceeds both baselines."""
        # Act
        dice = _means(study["summaries"][setting], "dice")

        # Assert
        assert dice["proposed"] > dice["greensite"]
        assert dice["proposed"] > dice["fixed-ep"]

    def test_proposed_origin_error_within_quarter_diagonal(self, desk, study):
        """Unseen origins: proposed mean origin error is under a quarter of the bounding-box diagonal."""
        # Act
        errors = _means(study["summaries"][SettingTag.UNSEEN_ORIGIN], "origin_error_mm")

        # Assert
        assert desk["mesh"].bounding_box_diagonal == pytest.approx(np.sqrt(7**2 + 7**2 + 3**2))
        assert errors["proposed"] < 0.25 * desk["mesh"].bounding_box_diagonal

    def test_runtime(self, study):
        """Training and all three settings finish within half an hour."""
        # Assert
        assert study["elapsed"] < RUNTIME_LIMIT_S
