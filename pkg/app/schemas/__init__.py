"""
Pydantic Schemas Package for configurations, reports and API responses.
"""
from .config import SUITE_NAMES, FieldSpec, PolyhedronSpec, RunConfig, ToleranceSpec
from .report import CheckRecord, CheckReport, ConvergenceRow, ExplainOut, RunDetail, RunOut, RunSummary

__all__ = [
    "SUITE_NAMES",
    "FieldSpec",
    "PolyhedronSpec",
    "RunConfig",
    "ToleranceSpec",
    "CheckRecord",
    "CheckReport",
    "ConvergenceRow",
    "ExplainOut",
    "RunDetail",
    "RunOut",
    "RunSummary",
]
