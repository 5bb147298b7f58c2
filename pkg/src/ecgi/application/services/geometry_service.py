"""Geometry application service."""

import logging
from pathlib import Path
from typing import Tuple, Union

from ...domain import DomainException, HeartMesh, LeadField
from ...domain.services import build_lattice_mesh, fibonacci_sphere_leads, synthesize_lead_field
from ...infrastructure import ContainerArtifactRepository
from ..dtos import GeometryResponse
from ..exceptions import ApplicationException

logger = logging.getLogger(__name__)


class GeometryApplicationService:
    """Builds and loads geometry bundles (mesh plus lead field).

    A bundle is the container every downstream command takes via ``--mesh``
    or ``--H``.
    """

    def __init__(self, artifacts: ContainerArtifactRepository):
        self.artifacts = artifacts

    def build(
        self,
        dims: Tuple[int, int, int],
        leads: int,
        out: Union[str, Path],
        spacing: float = 1.0,
        min_dist: float = 1.0,
    ) -> GeometryResponse:
        """Build a lattice heart, place leads on a sphere around it and save both."""
        try:
            mesh = build_lattice_mesh(dims, spacing)
            lead_field = synthesize_lead_field(mesh, fibonacci_sphere_leads(mesh, leads), min_dist)
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

        self.artifacts.save_geometry(out, mesh, lead_field, {"dims": list(dims)})
        logger.info("geometry bundle %s: %d nodes, %d leads", out, mesh.node_count, lead_field.lead_count)
        return GeometryResponse(
            path=str(out),
            node_count=mesh.node_count,
            lead_count=lead_field.lead_count,
            dims=tuple(dims),
            spacing=spacing,
            bounding_box_diagonal=mesh.bounding_box_diagonal,
        )

    def load(self, path: Union[str, Path]) -> Tuple[HeartMesh, LeadField]:
        """Load the mesh and lead field of a bundle."""
        try:
            mesh = self.artifacts.load_mesh(path)
            return mesh, self.artifacts.load_lead_field(path, mesh.node_count)
        except DomainException as e:
            raise ApplicationException(str(e))

    def load_lead_field(self, path: Union[str, Path]) -> LeadField:
        """Load only H, from a bundle or a standalone lead-field container."""
        try:
            return self.artifacts.load_lead_field(path)
        except DomainException as e:
            raise ApplicationException(str(e))
