"""API dependencies."""

import os
from dataclasses import dataclass
from typing import Generator, Optional

from fastapi import HTTPException, status
from pydantic import BaseModel
from sqlalchemy.orm import Session

from ..domain import DomainException, LeadField, VAEWeights, ZPrior
from ..infrastructure import ContainerArtifactRepository, Database


class ServiceSettings(BaseModel):
    """Server configuration, read from ``ECGI_*`` environment variables."""

    database_url: str = "sqlite:///ecgi.db"
    lead_field: Optional[str] = None
    weights: Optional[str] = None
    zprior: Optional[str] = None

    @classmethod
    def from_env(cls) -> "ServiceSettings":
        return cls(
            database_url=os.environ.get("ECGI_DATABASE_URL", "sqlite:///ecgi.db"),
            lead_field=os.environ.get("ECGI_LEAD_FIELD"),
            weights=os.environ.get("ECGI_WEIGHTS"),
            zprior=os.environ.get("ECGI_ZPRIOR"),
        )


@dataclass
class ModelArtifacts:
    """Artifacts the inversion endpoints serve with; loaded once per process."""

    lead_field: Optional[LeadField] = None
    weights: Optional[VAEWeights] = None
    zprior: Optional[ZPrior] = None


# Global state, set by the application lifespan
_database: Optional[Database] = None
_settings: Optional[ServiceSettings] = None
_models: Optional[ModelArtifacts] = None


def set_database(database: Database) -> None:
    """Set the global database instance."""
    global _database
    _database = database


def set_settings(settings: ServiceSettings) -> None:
    """Set the server settings and forget previously loaded artifacts."""
    global _settings, _models
    _settings = settings
    _models = None


def set_model_artifacts(models: ModelArtifacts) -> None:
    """Install preloaded artifacts directly (tests, embedding)."""
    global _models
    _models = models


def get_db() -> Generator[Session, None, None]:
    """Get database session."""
    if not _database:
        raise RuntimeError("Database not initialized")

    with _database.get_session() as session:
        yield session


def get_artifacts() -> ContainerArtifactRepository:
    return ContainerArtifactRepository()


def get_model_artifacts() -> ModelArtifacts:
    """Load the configured lead field, weights and Z prior on first use."""
    global _models
    if _models is None:
        settings = _settings or ServiceSettings.from_env()
        repo = ContainerArtifactRepository()
        try:
            _models = ModelArtifacts(
                lead_field=repo.load_lead_field(settings.lead_field) if settings.lead_field else None,
                weights=repo.load_weights(settings.weights) if settings.weights else None,
                zprior=repo.load_zprior(settings.zprior) if settings.zprior else None,
            )
        except DomainException as e:
            raise HTTPException(
                status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
                detail=f"server artifacts could not be loaded: {e}",
            )
    return _models
