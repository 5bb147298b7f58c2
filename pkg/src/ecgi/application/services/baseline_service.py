"""Baseline reconstruction application service."""

import logging
from pathlib import Path
from typing import Optional, Union

from ...domain import DomainException, ECGSequence, HeartMesh, LeadField
from ...domain.services import (
    FixedEPEstimate,
    GreensiteEstimate,
    estimate_beta,
    fixed_ep_reconstruct,
    greensite_reconstruct,
)
from ...infrastructure import ContainerArtifactRepository
from ..dtos import FixedEPConfigFile, FixedEPResponse, GreensiteConfigFile, GreensiteResponse
from ..exceptions import ApplicationException
from .mappers import to_fixed_ep_config, to_greensite_config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class BaselineApplicationService:
    """Runs the two reference reconstructions with the same container I/O as inference."""

    def __init__(self, artifacts: ContainerArtifactRepository):
        self.artifacts = artifacts

    def run_greensite(
        self,
        ecg: ECGSequence,
        lead_field: LeadField,
        request: Optional[GreensiteConfigFile] = None,
        dt_effective: float = 1.0,
    ) -> GreensiteEstimate:
        try:
            config = to_greensite_config(request or GreensiteConfigFile())
            return greensite_reconstruct(lead_field, ecg, config, dt_effective)
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

    def run_fixed_ep(
        self,
        ecg: ECGSequence,
        lead_field: LeadField,
        mesh: HeartMesh,
        request: Optional[FixedEPConfigFile] = None,
    ) -> FixedEPEstimate:
        """Fixed-model MAP estimate; β is estimated from the recording unless configured."""
        request = request or FixedEPConfigFile()
        try:
            beta = estimate_beta(ecg, lead_field, request.beta)
            return fixed_ep_reconstruct(lead_field, ecg, mesh, beta, to_fixed_ep_config(request))
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

    def greensite(
        self,
        ecg_path: PathLike,
        lead_field_path: PathLike,
        out: PathLike,
        request: Optional[GreensiteConfigFile] = None,
    ) -> GreensiteResponse:
        try:
            ecg = self.artifacts.load_ecg(ecg_path)
            lead_field = self.artifacts.load_lead_field(lead_field_path)
        except DomainException as e:
            raise ApplicationException(str(e))

        estimate = self.run_greensite(ecg, lead_field, request)
        self.artifacts.save_reconstruction(
            out,
            {"U_hat": estimate.tmp.U},
            {
                "method": "greensite",
                "lambda": estimate.lambda_,
                "rank": estimate.rank,
                "degenerate": estimate.degenerate,
            },
        )
        return self.to_greensite_response(estimate, path=str(out))

    def fixed_ep(
        self,
        ecg_path: PathLike,
        bundle_path: PathLike,
        out: PathLike,
        request: Optional[FixedEPConfigFile] = None,
    ) -> FixedEPResponse:
        """Needs a geometry bundle: the fixed model is simulated on its mesh."""
        try:
            ecg = self.artifacts.load_ecg(ecg_path)
            mesh = self.artifacts.load_mesh(bundle_path)
            lead_field = self.artifacts.load_lead_field(bundle_path, mesh.node_count)
        except DomainException as e:
            raise ApplicationException(str(e))

        estimate = self.run_fixed_ep(ecg, lead_field, mesh, request)
        self.artifacts.save_reconstruction(
            out,
            {"U_hat": estimate.tmp.U, "U_model": estimate.model_tmp.U},
            {"method": "fixed-ep", "beta": estimate.beta, "sigma2": estimate.sigma2},
        )
        return FixedEPResponse(beta=estimate.beta, sigma2=estimate.sigma2, path=str(out))

    def to_greensite_response(
        self, estimate: GreensiteEstimate, path: Optional[str] = None, include_estimate: bool = False
    ) -> GreensiteResponse:
        return GreensiteResponse(
            lambda_=estimate.lambda_,
            rank=estimate.rank,
            degenerate=estimate.degenerate,
            U_hat=estimate.tmp.U.tolist() if include_estimate else None,
            path=path,
        )
