"""Domain repository protocols."""

from .repositories import ArtifactRepository, CorpusRepository, MetricsRepository

__all__ = ["ArtifactRepository", "CorpusRepository", "MetricsRepository"]
