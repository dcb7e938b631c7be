"""
Check verdicts of a run.
"""

from sqlalchemy import (
    Column,
    Float,
    ForeignKey,
    Index,
    Integer,
    String,
    Enum as SQLEnum,
)
from sqlalchemy.orm import relationship

from ..core.stats import CheckStatus
from ..base import Base
from .runs import JSONType


class CheckResult(Base):
    __tablename__ = "check_results"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(
        Integer,
        ForeignKey("experiment_runs.id", ondelete="CASCADE"),
        nullable=False,
        index=True,
    )
    check_name = Column(String(50), nullable=False)
    statistic = Column(String(20), nullable=False)
    observable = Column(String(50), nullable=False)
    phi_id = Column(String(100), nullable=False)
    t = Column(Float, nullable=False)
    value = Column(Float, nullable=False)
    reference = Column(Float, nullable=True)
    abs_err = Column(Float, nullable=True)
    tolerance = Column(Float, nullable=False)
    status = Column(SQLEnum(CheckStatus), nullable=False, index=True)
    operands = Column(JSONType, nullable=True, default=dict)

    run = relationship("ExperimentRun", back_populates="checks")

    __table_args__ = (Index("idx_check_run_status", "run_id", "status"),)

    def __repr__(self) -> str:
        return (
            f"<CheckResult(id={self.id}, check='{self.check_name}', "
            f"observable='{self.observable}', status='{self.status}')>"
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "run_id": self.run_id,
            "check": self.check_name,
            "statistic": self.statistic,
            "observable": self.observable,
            "phi_id": self.phi_id,
            "t": self.t,
            "value": self.value,
            "reference": self.reference,
            "abs_err": self.abs_err,
            "tolerance": self.tolerance,
            "status": self.status.value if self.status else None,
            "operands": self.operands,
        }
