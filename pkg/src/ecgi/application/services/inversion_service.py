"""Inversion application service."""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ...domain import (
    DomainException,
    ECGSequence,
    EMResult,
    LeadField,
    MeasurementModel,
    VAEWeights,
    ZPrior,
)
from ...domain.services import em_infer, estimate_beta
from ...infrastructure import ContainerArtifactRepository
from ..dtos import EMConfigFile, InversionResponse
from ..exceptions import ApplicationException
from .mappers import to_em_config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class InversionApplicationService:
    """Reconstructs TMP from body-surface recordings with the learned prior.

    β is estimated once per recording (or taken from the config) and held
    fixed while EM runs.
    """

    def __init__(self, artifacts: ContainerArtifactRepository):
        self.artifacts = artifacts

    def reconstruct(
        self,
        ecg: ECGSequence,
        lead_field: LeadField,
        weights: VAEWeights,
        zprior: ZPrior,
        request: Optional[EMConfigFile] = None,
    ) -> EMResult:
        request = request or EMConfigFile()
        try:
            beta = estimate_beta(ecg, lead_field, request.beta, request.beta_max)
            model = MeasurementModel(lead_field, beta)
            return em_infer(model, ecg, weights, zprior, to_em_config(request))
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

    def infer(
        self,
        ecg_path: PathLike,
        weights_path: PathLike,
        zprior_path: PathLike,
        lead_field_path: PathLike,
        out: PathLike,
        request: Optional[EMConfigFile] = None,
    ) -> InversionResponse:
        """File-to-file inversion: writes Û, diag Σ̂, Ẑ and the objective trace."""
        try:
            ecg = self.artifacts.load_ecg(ecg_path)
            lead_field = self.artifacts.load_lead_field(lead_field_path)
            weights = self.artifacts.load_weights(weights_path)
            zprior = self.artifacts.load_zprior(zprior_path)
        except DomainException as e:
            raise ApplicationException(str(e))

        result = self.reconstruct(ecg, lead_field, weights, zprior, request)
        self.save_result(out, result)
        return self.to_response(result, path=str(out))

    def save_result(self, path: PathLike, result: EMResult) -> None:
        self.artifacts.save_reconstruction(
            path,
            {
                "U_hat": result.posterior.U_hat,
                "Sigma_diag": result.posterior.Sigma_diag,
                "Z_hat": result.Z_map.Z,
                "L_trace": np.asarray(result.objective_trace, dtype=np.float64),
            },
            {
                "method": "proposed",
                "beta": result.beta,
                "converged": result.converged,
                "iterations": len(result.trace),
            },
        )

    def to_response(
        self, result: EMResult, path: Optional[str] = None, include_estimate: bool = False
    ) -> InversionResponse:
        return InversionResponse(
            beta=result.beta,
            iterations=len(result.trace),
            converged=result.converged,
            objective_trace=result.objective_trace,
            U_hat=result.posterior.U_hat.tolist() if include_estimate else None,
            path=path,
        )
