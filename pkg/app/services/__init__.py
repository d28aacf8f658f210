"""
Services Package for the verification toolkit.
"""
from .database import get_session, init_db
from .errors import ConfigError, DimensionError, DomainError, EigenspaceError, GeometryError, RigidityError
from .catalogue import check_names, explain
from .recorder import delete_run, record_run, run_checks, summarize
from .reporting import converged, failed_checks, read_report, write_report
from .suites import SuiteRunner, build_fields, build_polyhedron

__all__ = [
    "get_session",
    "init_db",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "EigenspaceError",
    "GeometryError",
    "RigidityError",
    "check_names",
    "explain",
    "delete_run",
    "record_run",
    "run_checks",
    "summarize",
    "converged",
    "failed_checks",
    "read_report",
    "write_report",
    "SuiteRunner",
    "build_fields",
    "build_polyhedron",
]
