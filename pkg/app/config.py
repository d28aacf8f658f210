"""
Runtime settings read from the environment (.env supported).
"""
import logging
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv(override=True)

DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./rigidity_runs.db")
SQL_ECHO = os.getenv("SQL_ECHO", "false").lower() in ("1", "true", "yes")
REPORT_DIR = os.getenv("REPORT_DIR", "reports")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Number of points handed to the pointwise geometry kernels at once
CHUNK_SIZE = int(os.getenv("CHUNK_SIZE", "20000"))

VERSION = "1.0.0"


def configure_logging(level: str | None = None) -> None:
    """
    Configure the root logger once for the CLI or the API process.

    Args:
        level: Optional level name overriding LOG_LEVEL
    """
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
