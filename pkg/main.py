"""
Polyhedral Rigidity Checks API v1.0
A FastAPI application running numerical verification suites for rigidity
statements about initial data sets (M, g, q) on polyhedral domains.

Architecture:
- app/models: Database models (SQLModel) for recorded runs
- app/schemas: Pydantic schemas for run configurations and reports
- app/services: Numerical library, suite runner and persistence
- app/api: API route handlers
"""
import logging
from contextlib import asynccontextmanager
from fastapi import FastAPI

from app.config import VERSION, configure_logging
from app.schemas import SUITE_NAMES
from app.services.fields import PRESET_SOURCES
from app.services.polyhedron import PRESETS
from app.services import init_db
from app.api import checks_router, runs_router

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Application lifespan: startup and shutdown events.
    """
    # Startup
    configure_logging()
    logger.info("Starting application...")
    init_db()
    logger.info("Application ready!")

    yield

    # Shutdown
    logger.info("Shutting down application...")


# Create FastAPI application
app = FastAPI(
    title="Polyhedral Rigidity Checks API",
    description="Verification suites for initial data sets on polyhedral domains",
    version=VERSION,
    lifespan=lifespan
)


# Register routers
app.include_router(checks_router)
app.include_router(runs_router)


@app.get("/")
async def root():
    """
    Root endpoint with API information.
    """
    return {
        "message": "Polyhedral Rigidity Checks API",
        "docs": "/docs",
        "version": VERSION,
        "suites": list(SUITE_NAMES),
        "field_presets": sorted(PRESET_SOURCES),
        "polyhedron_presets": sorted(PRESETS) + ["domain"],
    }


@app.get("/health")
async def health_check():
    """
    Health check endpoint.
    """
    return {"status": "healthy", "version": VERSION}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
