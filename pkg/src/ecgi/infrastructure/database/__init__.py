"""Database module."""

from .database import Database
from .models import Base, ExperimentRunModel, MetricsRecordModel

__all__ = ["Database", "Base", "ExperimentRunModel", "MetricsRecordModel"]
