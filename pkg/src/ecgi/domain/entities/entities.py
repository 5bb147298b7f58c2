"""Domain entities for the ECG imaging laboratory.

Matrices follow the column-per-time-step convention throughout: a TMP
sequence is nodes × time, an ECG sequence leads × time and a latent
sequence latent-dim × time.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from ..value_objects import (
    CaseId,
    CorpusSpec,
    MethodTag,
    ScarRegion,
    SettingTag,
    SVAEConfig,
)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class HeartMesh:
    """Heart geometry as a graph with a diffusion operator.

    The laplacian follows the graph convention A − D scaled by 1/spacing², so
    every row sums to zero and the operator is negative semi-definite.
    """

    def __init__(
        self,
        node_coords: np.ndarray,
        edges: np.ndarray,
        laplacian: sparse.spmatrix,
        spacing: Optional[float] = None,
    ):
        coords = np.array(node_coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 3 or coords.shape[0] < 1:
            raise ValueError("node_coords must be an n×3 array with n ≥ 1")
        n = coords.shape[0]

        edge_array = np.array(edges, dtype=np.int64).reshape(-1, 2)
        if edge_array.size and (edge_array.min() < 0 or edge_array.max() >= n):
            raise ValueError("edge endpoints must be node indices")

        lap = sparse.csr_matrix(laplacian, dtype=np.float64)
        if lap.shape != (n, n):
            raise ValueError("laplacian must be n×n")
        scale = max(1.0, abs(lap).max() if lap.nnz else 0.0)
        if lap.nnz and abs(lap - lap.T).max() > 1e-10 * scale:
            raise ValueError("laplacian must be symmetric")
        row_sums = np.asarray(lap.sum(axis=1)).ravel()
        if np.any(np.abs(row_sums) > 1e-10 * scale):
            raise ValueError("laplacian rows must sum to zero")
        if n > 1:
            n_components, _ = connected_components(lap, directed=False)
            if n_components != 1:
                raise ValueError("mesh graph must be connected")

        self.node_coords = _readonly(coords)
        self.edges = _readonly(edge_array)
        self.laplacian = lap
        self.spacing = spacing

    @property
    def node_count(self) -> int:
        return self.node_coords.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    @property
    def max_diagonal(self) -> float:
        """Largest |L_ii|, i.e. max_degree/spacing² on a lattice."""
        return float(np.abs(self.laplacian.diagonal()).max())

    @property
    def bounding_box_diagonal(self) -> float:
        extent = self.node_coords.max(axis=0) - self.node_coords.min(axis=0)
        return float(np.linalg.norm(extent))

    @property
    def centroid(self) -> np.ndarray:
        return self.node_coords.mean(axis=0)

    def distances_from(self, node: int) -> np.ndarray:
        return np.linalg.norm(self.node_coords - self.node_coords[node], axis=1)

    def nodes_within(self, center: int, radius: float) -> Tuple[int, ...]:
        """Nodes whose Euclidean distance to center is at most radius."""
        if not 0 <= center < self.node_count:
            raise ValueError(f"node {center} out of range")
        close = np.flatnonzero(self.distances_from(center) <= radius + 1e-9)
        return tuple(int(i) for i in close)

    def uniform_subsample(self, count: int) -> Tuple[int, ...]:
        """Evenly spaced node indices across the node ordering."""
        if count < 1:
            raise ValueError("count must be positive")
        count = min(count, self.node_count)
        picks = np.unique(np.round(np.linspace(0, self.node_count - 1, count)))
        return tuple(int(i) for i in picks)


class LeadField:
    """Linear lead-field operator H (leads × nodes) with reference-free rows.

    require_centered=False admits analytic operators (identity, orthogonal
    matrices) whose rows are not zero-mean.
    """

    def __init__(
        self,
        H: np.ndarray,
        lead_coords: Optional[np.ndarray] = None,
        require_centered: bool = True,
    ):
        matrix = np.array(H, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError("H must be an m×n matrix with m, n ≥ 1")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("H must have finite entries")
        scale = max(1.0, float(np.abs(matrix).max()))
        if require_centered and np.any(np.abs(matrix.mean(axis=1)) > 1e-10 * scale):
            raise ValueError("H rows must have zero mean")
        coords = None
        if lead_coords is not None:
            coords = np.array(lead_coords, dtype=np.float64)
            if coords.shape != (matrix.shape[0], 3):
                raise ValueError("lead_coords must be m×3")
            coords = _readonly(coords)
        self.H = _readonly(matrix)
        self.lead_coords = coords

    @property
    def lead_count(self) -> int:
        return self.H.shape[0]

    @property
    def node_count(self) -> int:
        return self.H.shape[1]

    def project(self, U: np.ndarray) -> np.ndarray:
        return self.H @ U


@dataclass(frozen=True)
class TMPSequence:
    """TMP matrix U (nodes × time) in normalized action-potential units."""

    U: np.ndarray
    dt_effective: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        U = np.array(self.U, dtype=np.float64)
        if U.ndim != 2:
            raise ValueError("U must be a nodes × time matrix")
        if not np.all(np.isfinite(U)):
            raise ValueError("U must be finite")
        if not self.dt_effective > 0:
            raise ValueError("dt_effective must be positive")
        object.__setattr__(self, "U", _readonly(U))

    @property
    def node_count(self) -> int:
        return self.U.shape[0]

    @property
    def column_count(self) -> int:
        return self.U.shape[1]

    @property
    def duration(self) -> float:
        return self.column_count * self.dt_effective


@dataclass(frozen=True)
class ECGSequence:
    """Surface potentials Y (leads × time)."""

    Y: np.ndarray
    snr_db: float = float("inf")

    def __post_init__(self):
        Y = np.array(self.Y, dtype=np.float64)
        if Y.ndim != 2:
            raise ValueError("Y must be a leads × time matrix")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y must be finite")
        object.__setattr__(self, "Y", _readonly(Y))

    @property
    def column_count(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class LatentSequence:
    Z: np.ndarray

    def __post_init__(self):
        Z = np.array(self.Z, dtype=np.float64)
        if Z.ndim != 2 or not np.all(np.isfinite(Z)):
            raise ValueError("Z must be a finite latent-dim × time matrix")
        object.__setattr__(self, "Z", _readonly(Z))


@dataclass(frozen=True)
class EncoderOutput:
    """Mean and variance of q(Z|U), one diagonal Gaussian per column."""

    M: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        if self.M.shape != self.S.shape:
            raise ValueError("mean and variance shapes differ")
        if not np.all(self.S > 0):
            raise ValueError("variances must be strictly positive")


@dataclass(frozen=True)
class DecoderOutput:
    """Mean and variance of p(U|Z), one diagonal Gaussian per column."""

    M: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        if self.M.shape != self.S.shape:
            raise ValueError("mean and variance shapes differ")
        if not np.all(self.S > 0):
            raise ValueError("variances must be strictly positive")


@dataclass(frozen=True)
class ZPrior:
    """Per-entry Gaussian over Z.

    anchors optionally keeps the encoder means of the training sequences the
    prior was matched to, as (count, d, T).
    """

    Z_bar: np.ndarray
    C: np.ndarray
    anchors: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.Z_bar.shape != self.C.shape:
            raise ValueError("prior mean and variance shapes differ")
        if not np.all(self.C > 0):
            raise ValueError("prior variances must be strictly positive")
        if self.anchors is not None and (
            self.anchors.ndim != 3 or self.anchors.shape[1:] != self.Z_bar.shape
        ):
            raise ValueError("anchors must be a stack of latent sequences shaped like the prior mean")

    @property
    def anchor_count(self) -> int:
        return 0 if self.anchors is None else self.anchors.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.Z_bar.shape[0]

    @property
    def column_count(self) -> int:
        return self.Z_bar.shape[1]


@dataclass(frozen=True)
class PosteriorU:
    """Per-column Gaussian posterior of U; only the covariance diagonal is kept."""

    U_hat: np.ndarray
    Sigma_diag: np.ndarray
    log_evidence_terms: np.ndarray

    def __post_init__(self):
        if self.U_hat.shape != self.Sigma_diag.shape:
            raise ValueError("posterior mean and variance shapes differ")
        if not np.all(self.Sigma_diag > 0):
            raise ValueError("posterior variances must be strictly positive")


@dataclass(frozen=True)
class CorpusEntry:
    index: int
    origin: int
    region: ScarRegion
    scar_nodes: Tuple[int, ...]
    tmp: TMPSequence


@dataclass(frozen=True)
class Corpus:
    spec: CorpusSpec
    entries: Tuple[CorpusEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[CorpusEntry]:
        return iter(self.entries)

    def subset(self, indices: Sequence[int]) -> "Corpus":
        return Corpus(spec=self.spec, entries=tuple(self.entries[i] for i in indices))

    def tmp_stack(self) -> np.ndarray:
        """All sequences as a (count, nodes, time) array."""
        return np.stack([entry.tmp.U for entry in self.entries])


@dataclass(frozen=True)
class TestCase:
    case_id: CaseId
    tmp_true: TMPSequence
    ecg: ECGSequence
    origin_true: int
    scar_true: Tuple[int, ...]
    snr_db: float
    setting_tag: SettingTag

    # not a pytest collection target
    __test__ = False


class VAEWeights:
    """Named parameter arrays of the sequential VAE plus its configuration."""

    def __init__(
        self,
        config: SVAEConfig,
        params: Dict[str, np.ndarray],
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self.config = config
        self.params = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
        self.metadata = dict(metadata or {})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def names(self) -> List[str]:
        return list(self.params)

    def copy(self) -> "VAEWeights":
        return VAEWeights(self.config, self.params, self.metadata)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_elbo: float
    val_elbo: Optional[float]
    kl_weight: float
    reconstruction_rmse: float


@dataclass
class TrainingLog:
    epochs: List[EpochRecord] = field(default_factory=list)

    @property
    def train_elbo(self) -> List[float]:
        return [record.train_elbo for record in self.epochs]


@dataclass(frozen=True)
class EMIteration:
    iteration: int
    l_before: float
    l_after: float
    l_steps: Tuple[float, ...]


@dataclass(frozen=True)
class EMResult:
    Z_map: LatentSequence
    posterior: PosteriorU
    trace: Tuple[EMIteration, ...]
    converged: bool
    beta: float

    @property
    def objective_trace(self) -> List[float]:
        return [iteration.l_after for iteration in self.trace]


@dataclass(frozen=True)
class MetricsRecord:
    case_id: str
    method: MethodTag
    setting: SettingTag
    nrmse: Optional[float]
    dice: Optional[float]
    origin_error_mm: Optional[float]
    failure: Optional[str] = None

    def __post_init__(self):
        if self.nrmse is not None and self.nrmse < 0:
            raise ValueError("nrmse must be non-negative")
        if self.dice is not None and not 0 <= self.dice <= 1:
            raise ValueError("dice must lie in [0, 1]")

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass(frozen=True)
class MeasurementModel:
    """Y = H U + noise with i.i.d. Gaussian noise of precision beta.

    beta = 0 is accepted as the prior-only limit.
    """

    lead_field: LeadField
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be finite and non-negative")
