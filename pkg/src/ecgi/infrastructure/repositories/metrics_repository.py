"""Metrics repository implementation.

SQLAlchemy-backed storage of experiment runs and their per-case
MetricsRecords. Records are returned in the order they were added.
"""

import json
import uuid
from typing import List, Optional

from sqlalchemy.orm import Session

from ...domain import MetricsRecord, RunId
from ..database import ExperimentRunModel, MetricsRecordModel


class SQLMetricsRepository:
    """SQL implementation of MetricsRepository.

    Attributes:
        session: SQLAlchemy session, typically from Database.get_session()
    """

    def __init__(self, session: Session):
        self.session = session

    def save_run(self, run_id: RunId, setting: str, methods: List[str], config: dict) -> None:
        """Register a run, updating it if the id is already known."""
        model = self.session.get(ExperimentRunModel, uuid.UUID(str(run_id)))
        if model is None:
            model = ExperimentRunModel(id=uuid.UUID(str(run_id)))
            self.session.add(model)
        model.setting = setting
        model.methods = ",".join(methods)
        model.config = json.dumps(config, sort_keys=True, default=str)

    def add_records(self, run_id: RunId, records: List[MetricsRecord]) -> None:
        """Append records to a run, continuing its position counter."""
        key = uuid.UUID(str(run_id))
        start = self.session.query(MetricsRecordModel).filter_by(run_id=key).count()
        for offset, record in enumerate(records):
            self.session.add(
                MetricsRecordModel(
                    run_id=key,
                    position=start + offset,
                    case_id=record.case_id,
                    method=record.method,
                    setting=record.setting,
                    nrmse=record.nrmse,
                    dice=record.dice,
                    origin_error_mm=record.origin_error_mm,
                    failure=record.failure,
                )
            )

    def find_records(self, run_id: RunId) -> List[MetricsRecord]:
        models = (
            self.session.query(MetricsRecordModel)
            .filter_by(run_id=uuid.UUID(str(run_id)))
            .order_by(MetricsRecordModel.position)
            .all()
        )
        return [self._to_entity(m) for m in models]

    def find_run(self, run_id: RunId) -> Optional[dict]:
        model = self.session.get(ExperimentRunModel, uuid.UUID(str(run_id)))
        return self._run_summary(model) if model else None

    def list_runs(self) -> List[dict]:
        models = self.session.query(ExperimentRunModel).order_by(ExperimentRunModel.created_at).all()
        return [self._run_summary(m) for m in models]

    def _run_summary(self, model: ExperimentRunModel) -> dict:
        return {
            "run_id": str(model.id),
            "setting": model.setting,
            "methods": [m for m in model.methods.split(",") if m],
            "config": json.loads(model.config or "{}"),
            "created_at": model.created_at,
            "record_count": len(model.records),
        }

    def _to_entity(self, model: MetricsRecordModel) -> MetricsRecord:
        return MetricsRecord(
            case_id=model.case_id,
            method=model.method,
            setting=model.setting,
            nrmse=model.nrmse,
            dice=model.dice,
            origin_error_mm=model.origin_error_mm,
            failure=model.failure,
        )
