"""Tests for SQLMetricsRepository."""

import uuid

import pytest

from ecgi.domain import MethodTag, RunId
from ecgi.infrastructure import SQLMetricsRepository


@pytest.fixture
def run_id():
    return RunId(str(uuid.uuid4()))


class TestSQLMetricsRepository:
    """Test suite for run and record storage."""

    def test_records_round_trip_in_order(self, database, run_id, sample_records):
        """Records come back equal and in emission order."""
        # Arrange
        with database.get_session() as session:
            repo = SQLMetricsRepository(session)
            repo.save_run(run_id, "unseen-scar", ["proposed", "greensite"], {"seed": 0})
            repo.add_records(run_id, sample_records)

        # Act
        with database.get_session() as session:
            records = SQLMetricsRepository(session).find_records(run_id)

        # Assert
        assert records == sample_records

    def test_add_records_appends(self, database, run_id, sample_records):
        """A second batch continues after the first."""
        # Arrange
        with database.get_session() as session:
            repo = SQLMetricsRepository(session)
            repo.save_run(run_id, "unseen-scar", ["proposed"], {})
            repo.add_records(run_id, sample_records[:2])
        with database.get_session() as session:
            SQLMetricsRepository(session).add_records(run_id, sample_records[2:])

        # Act
        with database.get_session() as session:
            records = SQLMetricsRepository(session).find_records(run_id)

        # Assert
        assert [(r.case_id, r.method) for r in records] == [
            (r.case_id, r.method) for r in sample_records
        ]

    def test_run_summary(self, database, run_id, sample_records):
        """A run reports its methods, config and record count."""
        # Arrange
        with database.get_session() as session:
            repo = SQLMetricsRepository(session)
            repo.save_run(run_id, "unseen-scar", ["proposed", "greensite"], {"em": {"max_em_iters": 3}})
            repo.add_records(run_id, sample_records)

        # Act
        with database.get_session() as session:
            summary = SQLMetricsRepository(session).find_run(run_id)

        # Assert
        assert summary["run_id"] == run_id
        assert summary["setting"] == "unseen-scar"
        assert summary["methods"] == ["proposed", "greensite"]
        assert summary["config"] == {"em": {"max_em_iters": 3}}
        assert summary["record_count"] == 6

    def test_save_run_updates_existing(self, database, run_id):
        """Registering a known id overwrites its description."""
        # Arrange
        with database.get_session() as session:
            SQLMetricsRepository(session).save_run(run_id, "unseen-scar", ["proposed"], {})
        with database.get_session() as session:
            SQLMetricsRepository(session).save_run(run_id, "unseen-origin", ["fixed-ep"], {})

        # Act
        with database.get_session() as session:
            runs = SQLMetricsRepository(session).list_runs()

        # Assert
        assert len(runs) == 1
        assert runs[0]["setting"] == "unseen-origin"
        assert runs[0]["methods"] == ["fixed-ep"]

    def test_list_runs(self, database):
        """Every registered run is listed."""
        # Arrange
        ids = [RunId(str(uuid.uuid4())) for _ in range(2)]
        with database.get_session() as session:
            repo = SQLMetricsRepository(session)
            for run in ids:
                repo.save_run(run, "unseen-scar", [MethodTag.PROPOSED.value], {})

        # Act
        with database.get_session() as session:
            runs = SQLMetricsRepository(session).list_runs()

        # Assert
        assert {r["run_id"] for r in runs} == set(ids)
        assert all(r["record_count"] == 0 for r in runs)

    def test_unknown_run(self, database, run_id):
        """An id that was never saved has no summary and no records."""
        # Act
        with database.get_session() as session:
            repo = SQLMetricsRepository(session)
            summary = repo.find_run(run_id)
            records = repo.find_records(run_id)

        # Assert
        assert summary is None
        assert records == []
