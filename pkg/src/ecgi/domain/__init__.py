"""Domain layer exports."""

from .entities import (
    HeartMesh,
    LeadField,
    TMPSequence,
    ECGSequence,
    LatentSequence,
    EncoderOutput,
    DecoderOutput,
    ZPrior,
    PosteriorU,
    CorpusEntry,
    Corpus,
    TestCase,
    VAEWeights,
    EpochRecord,
    TrainingLog,
    EMIteration,
    EMResult,
    MetricsRecord,
    MeasurementModel,
)
from .value_objects import (
    CaseId,
    RunId,
    SettingTag,
    MethodTag,
    Activation,
    ScarMode,
    LambdaMode,
    ZInitMode,
    APParams,
    PacingConfig,
    ScarConfig,
    ScarRegion,
    PacingTemplate,
    CorpusSpec,
    SVAEConfig,
    EMConfig,
    GreensiteConfig,
    FixedEPConfig,
    ScarRule,
)
from .repositories import ArtifactRepository, CorpusRepository, MetricsRepository
from .exceptions import (
    DomainException,
    InvalidArgumentException,
    GeometryException,
    ConfigurationException,
    FormatException,
    InvalidStateException,
    SolverException,
    EstimationException,
    NonFiniteException,
    GradientCheckException,
)

__all__ = [
    "HeartMesh",
    "LeadField",
    "TMPSequence",
    "ECGSequence",
    "LatentSequence",
    "EncoderOutput",
    "DecoderOutput",
    "ZPrior",
    "PosteriorU",
    "CorpusEntry",
    "Corpus",
    "TestCase",
    "VAEWeights",
    "EpochRecord",
    "TrainingLog",
    "EMIteration",
    "EMResult",
    "MetricsRecord",
    "MeasurementModel",
    "CaseId",
    "RunId",
    "SettingTag",
    "MethodTag",
    "Activation",
    "ScarMode",
    "LambdaMode",
    "ZInitMode",
    "APParams",
    "PacingConfig",
    "ScarConfig",
    "ScarRegion",
    "PacingTemplate",
    "CorpusSpec",
    "SVAEConfig",
    "EMConfig",
    "GreensiteConfig",
    "FixedEPConfig",
    "ScarRule",
    "ArtifactRepository",
    "CorpusRepository",
    "MetricsRepository",
    "DomainException",
    "InvalidArgumentException",
    "GeometryException",
    "ConfigurationException",
    "FormatException",
    "InvalidStateException",
    "SolverException",
    "EstimationException",
    "NonFiniteException",
    "GradientCheckException",
]
