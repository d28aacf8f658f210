"""
Check suite API routes.
"""
import logging
from fastapi import APIRouter, Depends, HTTPException
from sqlmodel import Session

from app.schemas import ExplainOut, RunConfig, RunOut
from app.services import (
    RigidityError, SuiteRunner, check_names, explain, get_session, record_run, write_report,
)

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/checks", tags=["checks"])


@router.post("/run", response_model=RunOut)
def run_checks(config: RunConfig, session: Session = Depends(get_session)):
    """
    Run the enabled suites of a configuration and record the outcome.

    The request blocks until every suite has finished. Report files are
    written only when the configuration names an output directory.

    Args:
        config: Run configuration
        session: Database session

    Returns:
        Run id, report path and the full report

    Raises:
        HTTPException: 422 if the configuration cannot be run
    """
    try:
        report = SuiteRunner(config).run()
    except RigidityError as exc:
        raise HTTPException(status_code=422, detail=str(exc))

    report_path = None
    if config.output:
        report_path = str(write_report(report, config.output)["report"])
    run = record_run(session, report, report_path)
    return RunOut(run_id=run.id, report_path=report_path, report=report)


@router.get("/names", response_model=list[str])
async def list_check_names():
    """Names accepted by /checks/explain."""
    return check_names()


@router.get("/explain/{name}", response_model=ExplainOut)
async def explain_check(name: str):
    """
    Formula text of one check.

    Raises:
        HTTPException: 404 for an unknown name
    """
    try:
        return ExplainOut(name=name, text=explain(name))
    except RigidityError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
