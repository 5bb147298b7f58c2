"""Domain entities."""

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
]
