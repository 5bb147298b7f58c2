"""Application layer exports.

Application services orchestrate use cases: they load artifacts through the
infrastructure repositories, convert config DTOs into domain value objects,
call the domain services, and turn domain failures into
ApplicationException for the API and CLI.
"""

from .services import (
    BaselineApplicationService,
    CorpusApplicationService,
    ExperimentApplicationService,
    GeometryApplicationService,
    InversionApplicationService,
    SimulationApplicationService,
    TrainingApplicationService,
)
from .exceptions import ApplicationException

__all__ = [
    "BaselineApplicationService",
    "CorpusApplicationService",
    "ExperimentApplicationService",
    "GeometryApplicationService",
    "InversionApplicationService",
    "SimulationApplicationService",
    "TrainingApplicationService",
    "ApplicationException",
]
