"""Application DTOs."""

from .config_dtos import (
    APParamsConfig,
    CorpusSpecFile,
    EMConfigFile,
    ExperimentConfig,
    FixedEPConfigFile,
    GreensiteConfigFile,
    PacingTemplateConfig,
    ScarRegionConfig,
    ScarRuleConfig,
    VAEConfigFile,
)
from .result_dtos import (
    CorpusResponse,
    EpochResponse,
    ExperimentRunResponse,
    ExperimentSummary,
    FixedEPResponse,
    GeometryResponse,
    GreensiteResponse,
    GroupSummaryDTO,
    InversionResponse,
    MetricSummaryDTO,
    MetricsRecordDTO,
    PairedComparisonDTO,
    SampleResponse,
    SimulationResponse,
    CaseSetResponse,
    TrainingResponse,
    ZPriorResponse,
)

__all__ = [
    "APParamsConfig",
    "CorpusSpecFile",
    "EMConfigFile",
    "ExperimentConfig",
    "FixedEPConfigFile",
    "GreensiteConfigFile",
    "PacingTemplateConfig",
    "ScarRegionConfig",
    "ScarRuleConfig",
    "VAEConfigFile",
    "CorpusResponse",
    "EpochResponse",
    "ExperimentRunResponse",
    "ExperimentSummary",
    "FixedEPResponse",
    "GeometryResponse",
    "GreensiteResponse",
    "GroupSummaryDTO",
    "InversionResponse",
    "MetricSummaryDTO",
    "MetricsRecordDTO",
    "PairedComparisonDTO",
    "SampleResponse",
    "SimulationResponse",
    "CaseSetResponse",
    "TrainingResponse",
    "ZPriorResponse",
]
