"""Application services."""

from .geometry_service import GeometryApplicationService
from .simulation_service import SimulationApplicationService
from .corpus_service import CorpusApplicationService
from .training_service import TrainingApplicationService
from .inversion_service import InversionApplicationService
from .baseline_service import BaselineApplicationService
from .experiment_service import ExperimentApplicationService, read_results
from .mappers import read_config

__all__ = [
    "GeometryApplicationService",
    "SimulationApplicationService",
    "CorpusApplicationService",
    "TrainingApplicationService",
    "InversionApplicationService",
    "BaselineApplicationService",
    "ExperimentApplicationService",
    "read_results",
    "read_config",
]
