"""Infrastructure layer exports.

Concrete persistence for the protocols the domain declares: NTC1 containers
for numerical artifacts, corpus directories, and a SQLAlchemy results store.
Figure writers live here too since they touch the filesystem.
"""

from .containers import ContainerContents, load_container, save_container
from .database import Database
from .repositories import (
    ContainerArtifactRepository,
    FileCorpusRepository,
    SQLMetricsRepository,
)

__all__ = [
    "ContainerContents",
    "load_container",
    "save_container",
    "Database",
    "ContainerArtifactRepository",
    "FileCorpusRepository",
    "SQLMetricsRepository",
]
