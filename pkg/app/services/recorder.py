"""
Persistence of run reports in the run log tables.
"""
import logging
from sqlmodel import Session, select

from app.models import CheckLog, RunLog
from app.schemas import CheckReport, RunSummary

logger = logging.getLogger(__name__)


def record_run(session: Session, report: CheckReport, report_path: str | None = None) -> RunLog:
    """
    Store a report and its check records in one transaction.

    Args:
        session: Database session
        report: Finished report
        report_path: Report file, if one was written

    Returns:
        The stored RunLog with its id assigned
    """
    config = report.config
    run = RunLog(
        seed=report.seed,
        passed=report.passed,
        dimension=int(config.get("dimension", 0)),
        suites=sorted({c.suite for c in report.checks}),
        config=config,
        report_path=report_path,
    )
    session.add(run)
    try:
        session.flush()
        for check in report.checks:
            session.add(CheckLog(run_id=run.id, **check.model_dump()))
        session.commit()
    except Exception:
        session.rollback()
        raise
    session.refresh(run)
    logger.info("recorded run %s (%d checks, passed=%s)", run.id, len(report.checks), run.passed)
    return run


def run_checks(session: Session, run_id: int) -> list[CheckLog]:
    return list(session.exec(select(CheckLog).where(CheckLog.run_id == run_id).order_by(CheckLog.id)).all())


def summarize(session: Session, run: RunLog) -> RunSummary:
    failed = [c.name for c in run_checks(session, run.id) if not c.passed]
    return RunSummary(
        id=run.id, created_at=run.created_at, passed=run.passed, seed=run.seed,
        suites=list(run.suites or []), failed=failed,
    )


def delete_run(session: Session, run: RunLog) -> None:
    for check in run_checks(session, run.id):
        session.delete(check)
    session.delete(run)
    session.commit()
