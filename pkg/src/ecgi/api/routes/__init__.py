"""API routes."""

from .inversion_routes import router as inversion_router
from .baseline_routes import router as baseline_router
from .experiment_routes import router as experiment_router

__all__ = ["inversion_router", "baseline_router", "experiment_router"]
