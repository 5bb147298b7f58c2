"""Repository implementations.

- ContainerArtifactRepository: meshes, lead fields, sequences, weights, Z priors,
  test cases and reconstructions as NTC1 containers
- FileCorpusRepository: corpus directories with a JSON manifest
- SQLMetricsRepository: experiment runs and metrics records through SQLAlchemy
"""

from .artifact_repository import ContainerArtifactRepository
from .corpus_repository import FileCorpusRepository
from .metrics_repository import SQLMetricsRepository

__all__ = ["ContainerArtifactRepository", "FileCorpusRepository", "SQLMetricsRepository"]
