"""Synthetic heart geometry and the surrogate lead-field operator."""

import logging
from typing import Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist

from ..entities import HeartMesh, LeadField
from ..exceptions import GeometryException, InvalidArgumentException

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def build_lattice_mesh(dims: Tuple[int, int, int], spacing: float = 1.0) -> HeartMesh:
    """Regular 6-neighbour lattice with node index i + nx·(j + ny·k)."""
    if len(dims) != 3:
        raise InvalidArgumentException("dims must be an integer triple")
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) < 1:
        raise InvalidArgumentException(f"lattice dims must be positive, got {tuple(dims)}")
    if not spacing > 0:
        raise InvalidArgumentException(f"spacing must be positive, got {spacing}")

    n = nx * ny * nz
    index = np.arange(n).reshape(nz, ny, nx)
    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    coords = np.stack([i, j, k], axis=-1).reshape(-1, 3) * float(spacing)

    pairs = [
        (index[:, :, :-1], index[:, :, 1:]),
        (index[:, :-1, :], index[:, 1:, :]),
        (index[:-1, :, :], index[1:, :, :]),
    ]
    edges = np.concatenate(
        [np.stack([a.ravel(), b.ravel()], axis=1) for a, b in pairs]
    ) if n > 1 else np.empty((0, 2), dtype=np.int64)

    laplacian = graph_laplacian(n, edges) / float(spacing) ** 2
    logger.debug("lattice %s: %d nodes, %d edges", (nx, ny, nz), n, len(edges))
    return HeartMesh(coords, edges, laplacian, spacing=float(spacing))


def graph_laplacian(n: int, edges: np.ndarray) -> sparse.csr_matrix:
    """A − D for an undirected unit-weight edge list."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.ones(len(edges))
    adjacency = sparse.coo_matrix((weights, (edges[:, 0], edges[:, 1])), shape=(n, n))
    adjacency = (adjacency + adjacency.T).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    return (adjacency - sparse.diags(degree)).tocsr()


def fibonacci_sphere_leads(
    mesh: HeartMesh, count: int = 32, radius_factor: float = 4.0
) -> np.ndarray:
    """Leads on a sphere around the mesh centroid, Fibonacci-spiral layout."""
    if count < 1:
        raise InvalidArgumentException("lead count must be positive")
    radius = radius_factor * max(mesh.bounding_box_diagonal, 1.0)
    idx = np.arange(count)
    z = 1.0 - 2.0 * (idx + 0.5) / count
    ring = np.sqrt(1.0 - z**2)
    phi = idx * GOLDEN_ANGLE
    unit = np.stack([ring * np.cos(phi), ring * np.sin(phi), z], axis=1)
    return mesh.centroid + radius * unit


def center_rows(H: np.ndarray) -> np.ndarray:
    """Reference-free potentials: subtract each lead's mean over nodes."""
    return H - H.mean(axis=1, keepdims=True)


def synthesize_lead_field(
    mesh: HeartMesh, leads: Sequence[Sequence[float]], min_dist: float = 1.0
) -> LeadField:
    """Inverse-distance gains g_ij = 1/‖lead_i − node_j‖, row-centered."""
    lead_coords = np.asarray(leads, dtype=np.float64).reshape(-1, 3)
    if lead_coords.shape[0] < 1:
        raise InvalidArgumentException("at least one lead is required")
    distances = cdist(lead_coords, mesh.node_coords)
    closest = distances.min(axis=1)
    too_close = np.flatnonzero(closest < min_dist)
    if too_close.size:
        lead = int(too_close[0])
        raise GeometryException(
            f"lead {lead} lies {closest[lead]:.4g} mm from the mesh, below min_dist {min_dist}"
        )
    H = center_rows(1.0 / distances)
    logger.info("lead field: %d leads × %d nodes", *H.shape)
    return LeadField(H, lead_coords)
