"""
Database models (SQLModel) for recorded verification runs.
"""
from datetime import datetime, timezone
from typing import Optional
from sqlalchemy import JSON, Column
from sqlmodel import Field, SQLModel


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RunLog(SQLModel, table=True):
    """
    One recorded run.

    Attributes:
        id: Primary key
        created_at: Start time (UTC)
        seed: Seed of the randomized draws
        passed: Overall outcome
        dimension: Ambient dimension
        suites: Enabled suites
        config: Validated run configuration
        report_path: Report file written for the run, if any
    """
    id: Optional[int] = Field(default=None, primary_key=True)
    created_at: datetime = Field(default_factory=_now, index=True)
    seed: int = 0
    passed: bool = False
    dimension: int = 0
    suites: list = Field(default_factory=list, sa_column=Column(JSON))
    config: dict = Field(default_factory=dict, sa_column=Column(JSON))
    report_path: Optional[str] = None


class CheckLog(SQLModel, table=True):
    """
    One check record of a recorded run.

    Attributes:
        run_id: Owning run
        name: Check name
        suite: Suite name
        value: Measured value (None when not finite)
        comparison: "<=", ">=" or "info"
        threshold: Acceptance threshold
        passed: Outcome
        location: Point attached to the value
        params: Check parameters
        detail: Short free text
    """
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="runlog.id", index=True)
    name: str = Field(index=True)
    suite: str
    value: Optional[float] = None
    comparison: str = "<="
    threshold: Optional[float] = None
    passed: bool = False
    location: Optional[list] = Field(default=None, sa_column=Column(JSON))
    params: dict = Field(default_factory=dict, sa_column=Column(JSON))
    detail: str = ""


__all__ = ["RunLog", "CheckLog"]
