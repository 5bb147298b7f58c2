"""FastAPI application."""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from .routes import baseline_router, experiment_router, inversion_router
from .dependencies import ServiceSettings, set_database, set_settings
from ..infrastructure import Database

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan handler."""
    settings = ServiceSettings.from_env()
    set_settings(settings)

    database = Database(settings.database_url)
    set_database(database)
    database.create_tables()
    logger.info("results store at %s", settings.database_url)

    yield


app = FastAPI(
    title="ECGI API",
    description="TMP reconstruction from body-surface potentials and experiment results",
    version="0.1.0",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(inversion_router, prefix="/api/v1")
app.include_router(baseline_router, prefix="/api/v1")
app.include_router(experiment_router, prefix="/api/v1")


@app.get("/")
def read_root():
    return {"message": "ECGI API", "docs": "/docs"}
