"""
Report and convergence-table writers.

A report file starts with a single "# generated: <timestamp>" line followed by
a JSON body with sorted keys, so two runs with the same configuration and
seed differ only in the first line.
"""
import csv
import json
import logging
import math
from datetime import datetime
from pathlib import Path

from app.schemas import CheckRecord, CheckReport, ConvergenceRow

logger = logging.getLogger(__name__)

REPORT_FILE = "report.txt"
CHECKS_FILE = "checks.csv"
CONVERGENCE_FILE = "convergence.csv"


def observed_orders(residuals: list[float], floor: float = 1e-300) -> list[float | None]:
    """
    log2(r(h) / r(h/2)) for consecutive refinement levels.

    The first entry is None; entries where either residual is at the floor
    (exact zero) are None as well.
    """
    orders: list[float | None] = [None]
    for coarse, fine in zip(residuals[:-1], residuals[1:]):
        if coarse <= floor or fine <= floor:
            orders.append(None)
        else:
            orders.append(math.log2(coarse / fine))
    return orders


def convergence_rows(check: str, hs: list[float], residuals: list[float]) -> list[ConvergenceRow]:
    """Rows of a refinement table for one check."""
    return [
        ConvergenceRow(check=check, h=float(h), residual=float(r), order=o)
        for h, r, o in zip(hs, residuals, observed_orders(residuals))
    ]


def convergence_basis(residuals: list[float], min_order: float, abs_tol: float) -> str | None:
    """
    Criterion accepting a refinement sequence, or None if neither holds.

    The finest residual within abs_tol is reported as "within tolerance";
    otherwise a last observed order p >= min_order as "observed order p >= min_order".
    """
    if residuals[-1] <= abs_tol:
        return "within tolerance"
    last = observed_orders(residuals)[-1]
    if last is not None and last >= min_order:
        return f"observed order {last:.2f} >= {min_order:.2f}"
    return None


def converged(residuals: list[float], min_order: float, abs_tol: float) -> bool:
    """Finest residual within abs_tol, or the last observed order at least min_order."""
    return convergence_basis(residuals, min_order, abs_tol) is not None


def report_body(report: CheckReport) -> str:
    """Deterministic JSON body of a report."""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)


def write_report(report: CheckReport, out_dir, timestamp: datetime | None = None) -> dict[str, Path]:
    """
    Write the report and its CSV tables into out_dir.

    Returns:
        Mapping of file kind to written path
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = (timestamp or datetime.utcnow()).isoformat(timespec="seconds")
    paths = {
        "report": out / REPORT_FILE,
        "checks": out / CHECKS_FILE,
        "convergence": out / CONVERGENCE_FILE,
    }
    paths["report"].write_text(f"# generated: {stamp}\n{report_body(report)}\n", encoding="utf-8")

    with paths["checks"].open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["suite", "name", "value", "comparison", "threshold", "passed", "location", "detail"])
        for rec in report.checks:
            writer.writerow([
                rec.suite, rec.name, _fmt(rec.value), rec.comparison, _fmt(rec.threshold),
                int(rec.passed), " ".join(_fmt(x) for x in rec.location or []), rec.detail,
            ])

    with paths["convergence"].open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["check", "h", "residual", "order"])
        for row in report.convergence:
            writer.writerow([row.check, _fmt(row.h), _fmt(row.residual), _fmt(row.order)])

    logger.info("report written to %s", out)
    return paths


def read_report(path) -> CheckReport:
    """Load a report written by write_report (the timestamp line is skipped)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.startswith("#"):
        text = text.split("\n", 1)[1]
    return CheckReport.model_validate_json(text)


def failed_checks(report: CheckReport) -> list[CheckRecord]:
    return [rec for rec in report.checks if not rec.passed]


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))
