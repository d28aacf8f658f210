"""
Recorded run API routes.
"""
from fastapi import APIRouter, Depends, HTTPException
from sqlmodel import Session, select

from app.models import RunLog
from app.schemas import CheckRecord, RunDetail, RunSummary
from app.services import delete_run, get_session, run_checks, summarize

router = APIRouter(prefix="/runs", tags=["runs"])


@router.get("", response_model=list[RunSummary])
async def list_runs(passed: bool | None = None, limit: int = 50, session: Session = Depends(get_session)):
    """
    List recorded runs, newest first.

    Args:
        passed: Only runs with this outcome
        limit: Maximum number of runs
        session: Database session
    """
    statement = select(RunLog).order_by(RunLog.id.desc()).limit(limit)
    if passed is not None:
        statement = statement.where(RunLog.passed == passed)
    return [summarize(session, run) for run in session.exec(statement).all()]


@router.get("/{run_id}", response_model=RunDetail)
async def get_run(run_id: int, session: Session = Depends(get_session)):
    """
    One recorded run with its check records.

    Raises:
        HTTPException: If run not found
    """
    run = session.get(RunLog, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    summary = summarize(session, run)
    checks = [
        CheckRecord.model_validate(c.model_dump(exclude={"id", "run_id"}))
        for c in run_checks(session, run_id)
    ]
    return RunDetail(**summary.model_dump(), config=run.config, report_path=run.report_path, checks=checks)


@router.delete("/{run_id}")
async def remove_run(run_id: int, session: Session = Depends(get_session)):
    """
    Delete a recorded run and its check records.

    Raises:
        HTTPException: If run not found
    """
    run = session.get(RunLog, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    delete_run(session, run)
    return {"message": f"Run {run_id} deleted successfully"}
