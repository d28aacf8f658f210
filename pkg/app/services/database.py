"""
Run-log database: engine factory, table creation and request sessions.
"""
import logging
from sqlalchemy import Engine, create_engine
from sqlmodel import SQLModel, Session

from app.config import DATABASE_URL, SQL_ECHO

logger = logging.getLogger(__name__)


def make_engine(url: str = DATABASE_URL, echo: bool = SQL_ECHO) -> Engine:
    """
    Engine for a run-log database URL.

    sqlite connections are opened with check_same_thread disabled since the
    API serves sessions from a worker thread pool.
    """
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    return create_engine(url, echo=echo, connect_args=connect_args)


engine = make_engine()


def init_db(bind: Engine | None = None) -> None:
    """
    Create the RunLog and CheckLog tables if missing.

    Args:
        bind: Engine to use; the module engine by default
    """
    import app.models  # noqa: F401  registers the tables

    bind = bind or engine
    SQLModel.metadata.create_all(bind)
    logger.debug("run-log tables ready on %s", bind.url)


def get_session():
    """
    Dependency for database session.

    Yields:
        Session: SQLModel database session
    """
    with Session(engine) as session:
        yield session
