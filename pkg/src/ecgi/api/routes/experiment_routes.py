"""Experiment result API routes."""

from typing import List

from fastapi import APIRouter, Depends, HTTPException, status
from sqlalchemy.orm import Session

from ...application import ApplicationException, ExperimentApplicationService
from ...application.dtos import ExperimentRunResponse, ExperimentSummary, MetricsRecordDTO
from ...infrastructure import ContainerArtifactRepository, SQLMetricsRepository
from ..dependencies import get_db

router = APIRouter(prefix="/experiments", tags=["experiments"])


def _service(db: Session) -> ExperimentApplicationService:
    return ExperimentApplicationService(ContainerArtifactRepository(), SQLMetricsRepository(db))


@router.get("", response_model=List[ExperimentRunResponse])
def list_experiments(db: Session = Depends(get_db)):
    """List stored experiment runs, oldest first."""
    return _service(db).list_runs()


@router.get("/{run_id}/records", response_model=List[MetricsRecordDTO])
def get_experiment_records(run_id: str, db: Session = Depends(get_db)):
    """Per-case records of a run in emission order."""
    try:
        return _service(db).get_records(run_id)
    except ApplicationException as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e))


@router.get("/{run_id}/summary", response_model=ExperimentSummary)
def get_experiment_summary(run_id: str, db: Session = Depends(get_db)):
    """Mean ± std per method and paired comparisons, re-aggregated from stored records."""
    try:
        return _service(db).get_summary(run_id)
    except ApplicationException as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e))
