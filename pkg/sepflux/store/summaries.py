"""
Per-sample observable statistics of a run.
"""

from sqlalchemy import (
    Column,
    Float,
    ForeignKey,
    Index,
    Integer,
    String,
    UniqueConstraint,
)
from sqlalchemy.orm import relationship

from ..base import Base


class ObservableSummary(Base):
    __tablename__ = "observable_summaries"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(
        Integer,
        ForeignKey("experiment_runs.id", ondelete="CASCADE"),
        nullable=False,
        index=True,
    )
    observable = Column(String(50), nullable=False)
    phi_id = Column(String(100), nullable=False)
    t = Column(Float, nullable=False)
    count = Column(Integer, nullable=False)
    mean = Column(Float, nullable=False)
    var = Column(Float, nullable=False)
    stderr = Column(Float, nullable=False)
    reference = Column(Float, nullable=True)

    run = relationship("ExperimentRun", back_populates="summaries")

    __table_args__ = (
        UniqueConstraint("run_id", "observable", "phi_id", "t", name="uq_summary_sample"),
        Index("idx_summary_observable", "observable", "phi_id"),
    )

    def __repr__(self) -> str:
        return (
            f"<ObservableSummary(id={self.id}, observable='{self.observable}', "
            f"phi='{self.phi_id}', t={self.t})>"
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "run_id": self.run_id,
            "observable": self.observable,
            "phi_id": self.phi_id,
            "t": self.t,
            "count": self.count,
            "mean": self.mean,
            "var": self.var,
            "stderr": self.stderr,
            "reference": self.reference,
        }
