"""Result and response DTOs.

These shape what leaves the application layer: command summaries printed by
the CLI, HTTP response bodies, and the per-line records of ``results.jsonl``.
Arrays are returned as nested lists so every model serializes to plain JSON.
"""

from datetime import datetime
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class GeometryResponse(BaseModel):
    path: str
    node_count: int
    lead_count: int
    dims: Tuple[int, int, int]
    spacing: float
    bounding_box_diagonal: float


class SimulationResponse(BaseModel):
    path: str
    node_count: int
    column_count: int
    dt_effective: float
    origin_nodes: List[int]
    scar_nodes: List[int]
    u_min: float
    u_max: float


class CorpusResponse(BaseModel):
    directory: str
    count: int
    train_count: int
    val_count: int


class CaseSetResponse(BaseModel):
    directory: str
    setting: str
    snr_db: float
    case_ids: List[str]


class EpochResponse(BaseModel):
    epoch: int
    train_elbo: float
    val_elbo: Optional[float] = None
    kl_weight: float
    reconstruction_rmse: float


class TrainingResponse(BaseModel):
    path: str
    train_count: int
    val_count: int
    corpus_hash: Optional[str] = None
    epochs: List[EpochResponse]


class ZPriorResponse(BaseModel):
    path: str
    latent_dim: int
    column_count: int
    mean_variance: float


class SampleResponse(BaseModel):
    """Decoded samples and the share of their entries in the plausible range."""

    count: int
    source: str = Field(..., pattern=r"^(zprior|isotropic)$")
    plausible_fraction: float
    plot: Optional[str] = None


class InversionResponse(BaseModel):
    beta: float
    iterations: int
    converged: bool
    objective_trace: List[float]
    U_hat: Optional[List[List[float]]] = None
    path: Optional[str] = None


class GreensiteResponse(BaseModel):
    lambda_: float = Field(..., alias="lambda", serialization_alias="lambda")
    rank: int
    degenerate: bool
    U_hat: Optional[List[List[float]]] = None
    path: Optional[str] = None

    model_config = {"populate_by_name": True}


class FixedEPResponse(BaseModel):
    beta: float
    sigma2: float
    path: Optional[str] = None


class MetricsRecordDTO(BaseModel):
    """One line of ``results.jsonl``."""

    case_id: str
    method: str
    setting: str
    nrmse: Optional[float] = None
    dice: Optional[float] = None
    origin_error_mm: Optional[float] = None
    failure: Optional[str] = None


class MetricSummaryDTO(BaseModel):
    count: int
    mean: Optional[float] = None
    std: Optional[float] = None
    undefined: int = 0


class GroupSummaryDTO(BaseModel):
    setting: str
    method: str
    cases: int
    failures: int
    nrmse: MetricSummaryDTO
    dice: MetricSummaryDTO
    origin_error_mm: MetricSummaryDTO


class PairedComparisonDTO(BaseModel):
    setting: str
    metric: str
    reference: str
    other: str
    pairs: int
    mean_difference: Optional[float] = None
    t_statistic: Optional[float] = None
    p_value: Optional[float] = None


class ExperimentSummary(BaseModel):
    """Contents of ``summary.json``."""

    run_id: str
    setting: str
    methods: List[str]
    record_count: int
    failures: int
    groups: List[GroupSummaryDTO]
    paired: List[PairedComparisonDTO]


class ExperimentRunResponse(BaseModel):
    run_id: str
    setting: str
    methods: List[str]
    record_count: int
    created_at: Optional[datetime] = None
