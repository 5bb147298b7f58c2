"""Unit tests for lattice meshes and the surrogate lead field."""

import numpy as np
import pytest

from ecgi.domain import GeometryException, HeartMesh, InvalidArgumentException, LeadField
from ecgi.domain.services import (
    build_lattice_mesh,
    center_rows,
    fibonacci_sphere_leads,
    synthesize_lead_field,
)


class TestBuildLatticeMesh:
    """Test suite for build_lattice_mesh."""

    def test_smallest_lattice(self):
        """Two nodes joined by one edge."""
        # Act
        mesh = build_lattice_mesh((2, 1, 1))

        # Assert
        assert mesh.node_count == 2
        assert len(mesh.edges) == 1
        np.testing.assert_array_equal(mesh.laplacian.toarray(), [[-1.0, 1.0], [1.0, -1.0]])

    def test_planar_lattice_degrees(self):
        """Corner nodes have two neighbours, the center four."""
        # Act
        mesh = build_lattice_mesh((3, 3, 1))

        # Assert
        assert mesh.node_count == 9
        assert mesh.degrees[0] == 2
        assert mesh.degrees[4] == 4
        assert mesh.laplacian[4, 4] == -4.0

    def test_node_index_layout(self):
        """Node i + nx·(j + ny·k) sits at (i, j, k)·spacing."""
        # Act
        mesh = build_lattice_mesh((4, 3, 2), spacing=2.0)

        # Assert
        i, j, k = 3, 1, 1
        np.testing.assert_array_equal(mesh.node_coords[i + 4 * (j + 3 * k)], [6.0, 2.0, 2.0])

    def test_laplacian_rows_sum_to_zero(self, mesh):
        """Zero row sums and a symmetric negative semi-definite operator."""
        # Arrange
        dense = mesh.laplacian.toarray()

        # Assert
        np.testing.assert_allclose(dense.sum(axis=1), 0.0, atol=1e-12)
        np.testing.assert_array_equal(dense, dense.T)
        assert np.linalg.eigvalsh(dense).max() < 1e-10

    def test_spacing_scales_laplacian(self):
        """The operator carries 1/spacing²."""
        # Act
        unit = build_lattice_mesh((3, 2, 2))
        wide = build_lattice_mesh((3, 2, 2), spacing=2.0)

        # Assert
        np.testing.assert_allclose(wide.laplacian.toarray(), unit.laplacian.toarray() / 4.0)
        assert wide.max_diagonal == pytest.approx(unit.max_diagonal / 4.0)

    @pytest.mark.parametrize("dims", [(0, 2, 2), (3, -1, 2), (2, 2)])
    def test_invalid_dims(self, dims):
        """Non-positive or missing dimensions are rejected."""
        # Act & Assert
        with pytest.raises(InvalidArgumentException):
            build_lattice_mesh(dims)

    def test_invalid_spacing(self):
        """Spacing must be positive."""
        # Act & Assert
        with pytest.raises(InvalidArgumentException) as exc_info:
            build_lattice_mesh((2, 2, 2), spacing=0.0)

        assert "spacing" in str(exc_info.value)

    def test_disconnected_graph_rejected(self):
        """A mesh must be one connected component."""
        # Arrange
        coords = np.zeros((3, 3))
        coords[:, 0] = [0.0, 1.0, 5.0]
        laplacian = np.array([[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])

        # Act & Assert
        with pytest.raises(ValueError) as exc_info:
            HeartMesh(coords, np.array([[0, 1]]), laplacian)

        assert "connected" in str(exc_info.value)

    def test_nodes_within_radius(self, mesh):
        """Unit radius picks the node and its lattice neighbours."""
        # Act
        patch = mesh.nodes_within(0, 1.0)

        # Assert
        assert patch == (0, 1, 4, 16)


class TestSynthesizeLeadField:
    """Test suite for synthesize_lead_field."""

    def test_hand_computed_row(self):
        """Distances 1 and 2 give gains (1, 0.5), centered to (0.25, -0.25)."""
        # Arrange
        mesh = build_lattice_mesh((2, 1, 1))

        # Act
        lead_field = synthesize_lead_field(mesh, [[-1.0, 0.0, 0.0]])

        # Assert
        np.testing.assert_allclose(lead_field.H, [[0.25, -0.25]], atol=1e-15)

    def test_equidistant_lead_gives_zero_row(self):
        """A lead on the bisecting plane sees both nodes equally."""
        # Arrange
        mesh = build_lattice_mesh((2, 1, 1))

        # Act
        lead_field = synthesize_lead_field(mesh, [[0.5, 3.0, 0.0]])

        # Assert
        np.testing.assert_allclose(lead_field.H, [[0.0, 0.0]], atol=1e-15)

    def test_rows_centered(self, lead_field, mesh):
        """Rows sum to zero and a uniform TMP column projects to nothing."""
        # Act
        projection = lead_field.project(np.full((mesh.node_count, 1), 0.7))

        # Assert
        np.testing.assert_allclose(lead_field.H.sum(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(projection, 0.0, atol=1e-10)

    def test_lead_too_close(self):
        """A lead closer than min_dist is a geometry error naming the lead."""
        # Arrange
        mesh = build_lattice_mesh((2, 2, 2))

        # Act & Assert
        with pytest.raises(GeometryException) as exc_info:
            synthesize_lead_field(mesh, [[10.0, 0.0, 0.0], [0.5, 0.0, 0.0]], min_dist=1.0)

        assert "lead 1" in str(exc_info.value)

    def test_permutation_equivariance(self, mesh):
        """Permuting nodes permutes the columns of H the same way."""
        # Arrange
        leads = fibonacci_sphere_leads(mesh, 8)
        perm = np.random.default_rng(3).permutation(mesh.node_count)
        inverse = np.argsort(perm)
        dense = mesh.laplacian.toarray()
        permuted = HeartMesh(mesh.node_coords[perm], inverse[mesh.edges], dense[perm][:, perm])

        # Act
        H = synthesize_lead_field(mesh, leads).H
        H_permuted = synthesize_lead_field(permuted, leads).H

        # Assert
        np.testing.assert_allclose(H_permuted, H[:, perm], rtol=0, atol=1e-12)

    def test_deterministic(self, mesh):
        """Identical inputs give identical operators."""
        # Act
        first = synthesize_lead_field(mesh, fibonacci_sphere_leads(mesh, 6)).H
        second = synthesize_lead_field(mesh, fibonacci_sphere_leads(mesh, 6)).H

        # Assert
        np.testing.assert_array_equal(first, second)


class TestFibonacciSphereLeads:
    """Test suite for lead placement."""

    def test_leads_on_sphere(self, mesh):
        """Every lead sits at 4× the bounding-box diagonal from the centroid."""
        # Act
        leads = fibonacci_sphere_leads(mesh, 32)

        # Assert
        radii = np.linalg.norm(leads - mesh.centroid, axis=1)
        np.testing.assert_allclose(radii, 4.0 * mesh.bounding_box_diagonal)
        assert len(np.unique(leads.round(9), axis=0)) == 32


class TestLeadField:
    """Test suite for the LeadField entity."""

    def test_uncentered_rows_rejected(self):
        """Rows must be reference-free unless explicitly waived."""
        # Act & Assert
        with pytest.raises(ValueError) as exc_info:
            LeadField(np.eye(2))

        assert "zero mean" in str(exc_info.value)

    def test_centering_can_be_waived(self):
        """Analytic operators such as the identity are accepted on request."""
        # Act
        lead_field = LeadField(np.eye(2), require_centered=False)

        # Assert
        assert lead_field.lead_count == 2
        assert lead_field.node_count == 2

    def test_center_rows(self):
        """center_rows subtracts each row mean."""
        # Act
        centered = center_rows(np.array([[1.0, 2.0, 3.0]]))

        # Assert
        np.testing.assert_allclose(centered, [[-1.0, 0.0, 1.0]])
