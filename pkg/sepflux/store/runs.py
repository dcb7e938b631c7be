"""
Experiment run records of the results store.
"""

import datetime
from enum import Enum

from sqlalchemy import (
    BigInteger,
    Boolean,
    Column,
    DateTime,
    Index,
    Integer,
    String,
    JSON,
    Enum as SQLEnum,
)
from sqlalchemy.dialects.postgresql import JSONB
from sqlalchemy.orm import relationship

from ..base import Base

JSONType = JSON().with_variant(JSONB(), "postgresql")


class RunStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    experiment_id = Column(String(255), nullable=False, index=True)
    input_hash = Column(String(40), nullable=False, index=True)
    L = Column(Integer, nullable=False)
    n = Column(Integer, nullable=False)
    regime = Column(String(100), nullable=False)
    status = Column(SQLEnum(RunStatus), nullable=False, index=True)
    exploratory = Column(Boolean, default=False, nullable=False)
    replicas = Column(Integer, nullable=False)
    audits = Column(BigInteger, default=0, nullable=False)
    config = Column(JSONType, nullable=False, default=dict)
    metrics = Column(JSONType, nullable=True, default=dict)
    failures = Column(JSONType, nullable=True, default=dict)
    created_at = Column(DateTime, default=datetime.datetime.utcnow, nullable=False)

    summaries = relationship(
        "ObservableSummary", back_populates="run", cascade="all, delete-orphan"
    )
    checks = relationship("CheckResult", back_populates="run", cascade="all, delete-orphan")

    __table_args__ = (
        Index("idx_run_experiment_size", "experiment_id", "L"),
        Index("idx_run_created_at", "created_at"),
    )

    def __repr__(self) -> str:
        return (
            f"<ExperimentRun(id={self.id}, experiment='{self.experiment_id}', "
            f"L={self.L}, status='{self.status}')>"
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "experiment_id": self.experiment_id,
            "input_hash": self.input_hash,
            "L": self.L,
            "n": self.n,
            "regime": self.regime,
            "status": self.status.value if self.status else None,
            "exploratory": self.exploratory,
            "replicas": self.replicas,
            "audits": self.audits,
            "config": self.config,
            "metrics": self.metrics,
            "failures": self.failures,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }
