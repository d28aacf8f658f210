"""
Pydantic schemas for check results and run reports.
"""
from datetime import datetime
from typing import Optional
from pydantic import BaseModel, Field


class CheckRecord(BaseModel):
    """
    Outcome of one check.

    Attributes:
        name: Check name (see GET /checks/names)
        suite: Suite that produced it
        value: Measured quantity
        comparison: "<=" or ">=" against threshold, or "info" for reported-only values
        threshold: Acceptance threshold
        passed: Decision reproducible from value, comparison and threshold
        location: Point attached to the value (worst node, face sample, ...)
        params: Check parameters (face id, resolution, dimension, ...)
        detail: Short free text
    """
    name: str
    suite: str
    value: Optional[float] = None
    comparison: str = "<="
    threshold: Optional[float] = None
    passed: bool
    location: Optional[list[float]] = None
    params: dict = Field(default_factory=dict)
    detail: str = ""


class ConvergenceRow(BaseModel):
    """
    One refinement level.

    Attributes:
        check: Check name
        h: Grid spacing, step size or 1/lambda
        residual: Measured residual
        order: log2 of the residual ratio to the previous level
    """
    check: str
    h: float
    residual: float
    order: Optional[float] = None


class CheckReport(BaseModel):
    """
    Full report of a run.

    Attributes:
        version: Toolkit version
        seed: Seed of the randomized draws
        environment: Dimension, grid and method
        config: The validated run configuration
        checks: Check records in execution order
        convergence: Refinement tables
        passed: True iff every check passed
    """
    version: str
    seed: int
    environment: dict
    config: dict
    checks: list[CheckRecord]
    convergence: list[ConvergenceRow]
    passed: bool


class RunSummary(BaseModel):
    """
    Stored run as listed by GET /runs.

    Attributes:
        id: Run id
        created_at: Start time
        passed: Overall outcome
        seed: Seed
        suites: Enabled suites
        failed: Names of failed checks
    """
    id: int
    created_at: datetime
    passed: bool
    seed: int
    suites: list[str]
    failed: list[str]


class ExplainOut(BaseModel):
    """
    Attributes:
        name: Check name
        text: Formula and description
    """
    name: str
    text: str


class RunOut(BaseModel):
    """
    Response of POST /checks/run.

    Attributes:
        run_id: Id of the recorded run
        report_path: Report file, when the configuration names an output directory
        report: Full report
    """
    run_id: int
    report_path: Optional[str] = None
    report: CheckReport


class RunDetail(RunSummary):
    """
    Stored run with its configuration and check records.

    Attributes:
        config: Validated run configuration
        report_path: Report file, if one was written
        checks: Check records in execution order
    """
    config: dict
    report_path: Optional[str] = None
    checks: list[CheckRecord]
