"""Tests for CorpusApplicationService."""

import json

import numpy as np
import pytest

from ecgi.application import ApplicationException, CorpusApplicationService
from ecgi.application.dtos import APParamsConfig, CorpusSpecFile, ScarRegionConfig


@pytest.fixture
def corpus_service(artifacts, corpora):
    return CorpusApplicationService(artifacts, corpora)


@pytest.fixture
def spec_file():
    return CorpusSpecFile(
        origin_nodes=[0, 15],
        scar_regions=[ScarRegionConfig(), ScarRegionConfig(center=21)],
        ap_params=APParamsConfig(n_steps=400, record_stride=20),
        val_fraction=0.25,
    )


class TestGenerate:
    """Test suite for CorpusApplicationService.generate."""

    def test_explicit_spec(self, corpus_service, corpora, geometry_bundle, spec_file, small_corpus, tmp_path):
        """Listed origins and regions are simulated as their product."""
        # Act
        response = corpus_service.generate(geometry_bundle, spec_file, tmp_path / "corpus")

        # Assert
        assert (response.count, response.train_count, response.val_count) == (4, 3, 1)
        loaded = corpora.load(tmp_path / "corpus")
        for generated, expected in zip(loaded, small_corpus):
            np.testing.assert_allclose(generated.tmp.U, expected.tmp.U)

    def test_scar_free_when_no_regions(self, corpus_service, corpora, geometry_bundle, tmp_path):
        """Origins without regions give a scar-free corpus."""
        # Arrange
        request = CorpusSpecFile(
            origin_nodes=[0, 15], ap_params=APParamsConfig(n_steps=400, record_stride=20)
        )

        # Act
        response = corpus_service.generate(geometry_bundle, request, tmp_path / "corpus")

        # Assert
        assert response.count == 2
        assert all(entry.scar_nodes == () for entry in corpora.load(tmp_path / "corpus"))

    def test_inadmissible_pair(self, corpus_service, geometry_bundle, spec_file, tmp_path):
        """An origin whose patch touches a scar is rejected before anything is written."""
        # Arrange
        request = spec_file.model_copy(update={"scar_regions": [ScarRegionConfig(center=1)]})

        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            corpus_service.generate(geometry_bundle, request, tmp_path / "corpus")

        assert "origin 0" in str(exc_info.value)
        assert not (tmp_path / "corpus").exists()


class TestMakeCases:
    """Test suite for CorpusApplicationService.make_cases and load_cases."""

    def test_unseen_origin_cases(self, corpus_service, geometry_bundle, corpus_dir, tmp_path):
        """Cases are saved one per file with a cases.json index."""
        # Arrange
        out = tmp_path / "cases"

        # Act
        response = corpus_service.make_cases(
            geometry_bundle, corpus_dir, "unseen-origin", out, snr_db=20.0, n_origins=2, n_scars=1
        )
        cases = corpus_service.load_cases(out)

        # Assert
        assert response.case_ids == ["unseen-origin-000", "unseen-origin-001"]
        assert json.loads((out / "cases.json").read_text())["case_ids"] == response.case_ids
        assert [case.case_id for case in cases] == response.case_ids
        assert all(case.origin_true not in (0, 15) for case in cases)
        assert all(case.snr_db == 20.0 for case in cases)

    def test_unknown_setting(self, corpus_service, geometry_bundle, corpus_dir, tmp_path):
        """Only the three held-out settings exist."""
        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            corpus_service.make_cases(geometry_bundle, corpus_dir, "unseen-heart", tmp_path / "cases")

        assert "unknown setting 'unseen-heart'" in str(exc_info.value)

    def test_empty_case_directory(self, corpus_service, tmp_path):
        """A directory without containers has no cases."""
        # Act & Assert
        with pytest.raises(ApplicationException) as exc_info:
            corpus_service.load_cases(tmp_path)

        assert "no test cases" in str(exc_info.value)
