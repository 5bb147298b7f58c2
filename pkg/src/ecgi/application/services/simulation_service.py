"""Simulation application service."""

import logging
from pathlib import Path
from typing import Optional, Union

from ...domain import DomainException, ScarRegion
from ...domain.services import pacing_for_origin, scar_config_for_region, simulate
from ...infrastructure import ContainerArtifactRepository
from ..dtos import APParamsConfig, PacingTemplateConfig, SimulationResponse
from ..exceptions import ApplicationException
from .mappers import to_ap_params, to_pacing_template

logger = logging.getLogger(__name__)


class SimulationApplicationService:
    """Runs one paced, optionally scarred, simulation on a saved mesh."""

    def __init__(self, artifacts: ContainerArtifactRepository):
        self.artifacts = artifacts

    def run(
        self,
        mesh_path: Union[str, Path],
        origin: int,
        out: Union[str, Path],
        scar_center: Optional[int] = None,
        scar_radius: float = 0.0,
        params: Optional[APParamsConfig] = None,
        pacing: Optional[PacingTemplateConfig] = None,
    ) -> SimulationResponse:
        try:
            mesh = self.artifacts.load_mesh(mesh_path)
            template = to_pacing_template(pacing or PacingTemplateConfig())
            pacing_config = pacing_for_origin(mesh, origin, template)
            scar = scar_config_for_region(mesh, ScarRegion(scar_center, scar_radius))
            tmp = simulate(mesh, to_ap_params(params or APParamsConfig()), pacing_config, scar)
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

        self.artifacts.save_tmp(out, tmp)
        return SimulationResponse(
            path=str(out),
            node_count=tmp.node_count,
            column_count=tmp.column_count,
            dt_effective=tmp.dt_effective,
            origin_nodes=list(pacing_config.origin_nodes),
            scar_nodes=list(scar.scar_nodes),
            u_min=float(tmp.U.min()),
            u_max=float(tmp.U.max()),
        )
