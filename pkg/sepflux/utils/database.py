"""
Database utility functions for the sepflux results store.

URL resolution, the store engine, the DatabaseManager context manager
and the persistence of experiment reports.
"""

import logging
import os
from typing import TYPE_CHECKING, Any, Dict, List, Optional

from dotenv import load_dotenv
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine, make_url
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool

from ..base import Base
from ..store import CheckResult, ExperimentRun, ObservableSummary, RunStatus

if TYPE_CHECKING:
    from ..report import Report

logger = logging.getLogger(__name__)

DATABASE_URL_ENV = "SEPFLUX_DATABASE_URL"
STORE_POOL_SIZE = 2


def get_database_url(explicit: Optional[str] = None) -> Optional[str]:
    """
    Resolve the results-store URL.

    Args:
        explicit: URL given on the command line; wins over the environment

    Returns:
        Normalised URL, or None when no store is configured
    """
    url = explicit
    if not url:
        load_dotenv()
        url = os.environ.get(DATABASE_URL_ENV)
    # SQLAlchemy 2.0+ requires postgresql:// instead of postgres://
    if url and url.startswith("postgres://"):
        url = url.replace("postgres://", "postgresql://", 1)
    return url


def create_store_engine(database_url: str, echo: bool = False, **kwargs) -> Engine:
    """
    Engine for the results store.

    A run writes its reports once at the end, so PostgreSQL stores get a
    small pre-pinged pool. SQLite stores, including the in-memory URL the
    tests use, share one connection across the replica threads.

    Args:
        database_url: Normalised store URL, see get_database_url
        echo: Log every emitted statement through sqlalchemy.engine
        **kwargs: Passed on to create_engine
    """
    engine_kwargs: Dict[str, Any] = {"echo": echo, **kwargs}
    if database_url.startswith("sqlite"):
        engine_kwargs.setdefault("poolclass", StaticPool)
        engine_kwargs.setdefault("connect_args", {"check_same_thread": False})
    else:
        engine_kwargs.setdefault("pool_pre_ping", True)
        engine_kwargs.setdefault("pool_size", STORE_POOL_SIZE)
        engine_kwargs.setdefault("max_overflow", 0)
    safe_url = make_url(database_url).render_as_string(hide_password=True)
    logger.debug("results store engine for %s", safe_url)
    return create_engine(database_url, **engine_kwargs)


class DatabaseManager:
    """
    Connection to the results store.

    Holds the engine and a session factory whose sessions neither autoflush
    nor expire on commit, so saved runs stay readable after the commit.
    Usable as a context manager; the engine is disposed on exit.

    Args:
        database_url: Normalised store URL
        **engine_kwargs: Passed on to create_store_engine
    """

    def __init__(self, database_url: str, **engine_kwargs):
        self.database_url = database_url
        self.engine = create_store_engine(database_url, **engine_kwargs)
        self.session_factory = sessionmaker(bind=self.engine, autoflush=False, expire_on_commit=False)

    def get_session(self) -> Session:
        return self.session_factory()

    def create_tables(self) -> None:
        """Create the run, summary and check tables that do not exist yet."""
        Base.metadata.create_all(bind=self.engine)

    def drop_tables(self) -> None:
        """Drop every results-store table with all stored runs."""
        Base.metadata.drop_all(bind=self.engine)

    def close(self) -> None:
        self.engine.dispose()

    def __enter__(self) -> "DatabaseManager":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()


def _run_from_report(report: "Report") -> ExperimentRun:
    run = ExperimentRun(
        experiment_id=report.experiment_id,
        input_hash=report.input_hash,
        L=report.L,
        n=report.n,
        regime=report.regime_label,
        status=RunStatus(report.status),
        exploratory=report.exploratory,
        replicas=int(report.config.get("replicas", 0)),
        audits=report.audits,
        config=report.config,
        metrics=report.metrics,
        failures={str(k): v for k, v in report.failures.items()},
    )
    seen = set()
    for row in report.sorted_rows():
        key = (row.observable, row.phi_id, row.t)
        if key not in seen:
            seen.add(key)
            run.summaries.append(
                ObservableSummary(
                    observable=row.observable,
                    phi_id=row.phi_id,
                    t=row.t,
                    count=row.summary.count,
                    mean=row.summary.mean,
                    var=row.summary.var,
                    stderr=row.summary.stderr,
                    reference=row.reference,
                )
            )
        if row.record is not None:
            run.checks.append(
                CheckResult(
                    check_name=row.record.check,
                    statistic=row.record.statistic,
                    observable=row.observable,
                    phi_id=row.phi_id,
                    t=row.t,
                    value=row.record.value,
                    reference=row.record.reference,
                    abs_err=row.record.abs_err,
                    tolerance=row.record.tolerance,
                    status=row.record.status,
                    operands=row.record.operands,
                )
            )
    return run


def save_report(report: "Report", manager: DatabaseManager) -> int:
    """Persist one report; returns the ExperimentRun id."""
    return save_reports([report], manager)[0]


def save_reports(reports: List["Report"], manager: DatabaseManager) -> List[int]:
    """
    Persist reports with their summaries and check verdicts.

    Returns:
        Ids of the created ExperimentRun rows
    """
    manager.create_tables()
    with manager.get_session() as session:
        runs = [_run_from_report(r) for r in reports]
        session.add_all(runs)
        session.commit()
        ids = [run.id for run in runs]
    logger.info("stored %d run(s) in the results store", len(ids))
    return ids
