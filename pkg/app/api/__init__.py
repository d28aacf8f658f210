"""
API Routes Package
"""
from .checks import router as checks_router
from .runs import router as runs_router

__all__ = ["checks_router", "runs_router"]
