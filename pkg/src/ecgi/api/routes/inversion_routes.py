"""Inversion API routes."""

from typing import Optional

from fastapi import APIRouter, Depends, File, Form, HTTPException, UploadFile, status

from ...application import ApplicationException, InversionApplicationService
from ...application.dtos import EMConfigFile, InversionResponse
from ...domain import DomainException
from ...infrastructure import ContainerArtifactRepository
from ..dependencies import ModelArtifacts, get_artifacts, get_model_artifacts

router = APIRouter(prefix="/inversions", tags=["inversions"])


@router.post("", response_model=InversionResponse)
async def create_inversion(
    ecg: UploadFile = File(...),
    beta: Optional[float] = Form(None),
    max_em_iters: int = Form(50),
    artifacts: ContainerArtifactRepository = Depends(get_artifacts),
    models: ModelArtifacts = Depends(get_model_artifacts),
):
    """Reconstruct TMP from an uploaded ECG container with the server's model."""
    if models.lead_field is None or models.weights is None or models.zprior is None:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="server has no lead field, weights and Z prior configured",
        )
    try:
        recording = artifacts.parse_ecg(await ecg.read())
        request = EMConfigFile(beta=beta, max_em_iters=max_em_iters)
    except (DomainException, ValueError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))

    service = InversionApplicationService(artifacts)
    try:
        result = service.reconstruct(
            recording, models.lead_field, models.weights, models.zprior, request
        )
    except ApplicationException as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return service.to_response(result, include_estimate=True)
