"""Baseline API routes."""

from typing import Optional

from fastapi import APIRouter, Depends, File, Form, HTTPException, UploadFile, status

from ...application import ApplicationException, BaselineApplicationService
from ...application.dtos import GreensiteConfigFile, GreensiteResponse
from ...domain import DomainException
from ...infrastructure import ContainerArtifactRepository
from ..dependencies import ModelArtifacts, get_artifacts, get_model_artifacts

router = APIRouter(prefix="/baselines", tags=["baselines"])


@router.post("/greensite", response_model=GreensiteResponse, response_model_by_alias=True)
async def create_greensite(
    ecg: UploadFile = File(...),
    energy_fraction: float = Form(0.95),
    lambda_fixed: Optional[float] = Form(None),
    artifacts: ContainerArtifactRepository = Depends(get_artifacts),
    models: ModelArtifacts = Depends(get_model_artifacts),
):
    """Temporal-SVD Tikhonov reconstruction of an uploaded ECG container."""
    if models.lead_field is None:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="server has no lead field configured",
        )
    try:
        recording = artifacts.parse_ecg(await ecg.read())
        request = GreensiteConfigFile(
            energy_fraction=energy_fraction,
            lambda_mode="l-curve" if lambda_fixed is None else "fixed",
            lambda_fixed=lambda_fixed or 0.0,
        )
    except (DomainException, ValueError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))

    service = BaselineApplicationService(artifacts)
    try:
        estimate = service.run_greensite(recording, models.lead_field, request)
    except ApplicationException as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return service.to_greensite_response(estimate, include_estimate=True)
