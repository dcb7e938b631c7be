"""
Report structures and their CSV / JSON serialisation.
"""

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from .core.stats import CheckRecord, CheckStatus, SummaryStats

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "experiment_id",
    "L",
    "n",
    "regime",
    "observable",
    "phi_id",
    "t",
    "R",
    "mean",
    "var",
    "stderr",
    "reference",
    "abs_err",
    "check",
    "status",
)


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


def content_hash(data: bytes) -> str:
    """Git blob hash: sha1 of b'blob <size>\\0' + data."""
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return repr(float(value))


@dataclass
class ReportRow:
    observable: str
    phi_id: str
    t: float
    summary: SummaryStats
    reference: Optional[float] = None
    record: Optional[CheckRecord] = None

    @property
    def check(self) -> str:
        return self.record.check if self.record else "none"

    @property
    def status(self) -> CheckStatus:
        return self.record.status if self.record else CheckStatus.INFO

    @property
    def abs_err(self) -> Optional[float]:
        if self.record is not None and self.record.reference is not None:
            return self.record.abs_err
        if self.reference is None:
            return None
        return abs(self.summary.mean - self.reference)

    @property
    def key(self):
        return (self.observable, self.phi_id, self.t, self.check)

    def as_csv(self, experiment_id: str, L: int, n: int, regime: str) -> List[str]:
        reference = self.reference
        if self.record is not None and self.record.reference is not None:
            reference = self.record.reference
        return [
            experiment_id,
            str(L),
            str(n),
            regime,
            self.observable,
            self.phi_id,
            _fmt(self.t),
            str(self.summary.count),
            _fmt(self.summary.mean),
            _fmt(self.summary.var),
            _fmt(self.summary.stderr),
            _fmt(reference),
            _fmt(self.abs_err),
            self.check,
            self.status.value,
        ]

    def to_dict(self) -> dict:
        return {
            "observable": self.observable,
            "phi_id": self.phi_id,
            "t": self.t,
            "summary": self.summary.to_dict(),
            "reference": self.reference,
            "check": self.record.to_dict() if self.record else None,
        }


@dataclass
class Report:
    """
    Results of one experiment at one lattice size.

    Attributes:
        rows: one entry per (observable, phi, t, check)
        audits: pathwise identity checks passed over all replicas
        failures: replica id -> error payload
        metrics: runtime figures, excluded from the CSV
    """

    experiment_id: str
    L: int
    n: int
    regime: Dict[str, Any]
    config: Dict[str, Any]
    input_hash: str
    rows: List[ReportRow] = field(default_factory=list)
    audits: int = 0
    failures: Dict[int, Dict[str, Any]] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)
    exploratory: bool = False

    @property
    def records(self) -> List[CheckRecord]:
        return [r.record for r in self.rows if r.record is not None]

    @property
    def passed(self) -> bool:
        if self.failures:
            return False
        return all(rec.status != CheckStatus.FAIL for rec in self.records)

    @property
    def status(self) -> str:
        if self.failures:
            return "error"
        return "pass" if self.passed else "fail"

    @property
    def regime_label(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in sorted(self.regime.items()) if k != "type")
        return f"{self.regime['type']}({params})"

    def sorted_rows(self) -> List[ReportRow]:
        return sorted(self.rows, key=lambda r: r.key)

    def csv_rows(self) -> Iterable[List[str]]:
        for row in self.sorted_rows():
            yield row.as_csv(self.experiment_id, self.L, self.n, self.regime_label)

    def summary(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "L": self.L,
            "n": self.n,
            "regime": self.regime,
            "status": self.status,
            "exploratory": self.exploratory,
            "input_hash": self.input_hash,
            "config": self.config,
            "audits": self.audits,
            "failures": {str(k): v for k, v in sorted(self.failures.items())},
            "checks": [
                {"observable": r.observable, "phi_id": r.phi_id, "t": r.t, **r.record.to_dict()}
                for r in self.sorted_rows()
                if r.record is not None
            ],
            "metrics": self.metrics,
        }


def write_csv(reports: Iterable[Report], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            writer.writerows(report.csv_rows())
    return path


def write_summary(reports: List[Report], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "status": "error"
        if any(r.failures for r in reports)
        else ("pass" if all(r.passed for r in reports) else "fail"),
        "reports": [r.summary() for r in reports],
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def write_normalized_config(config: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config, indent=2, sort_keys=True), encoding="utf-8")
    return path


def write_reports(
    reports: List[Report], out_dir: Path, experiment_id: str, config: Dict[str, Any]
) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    paths = {
        "csv": write_csv(reports, out_dir / f"{experiment_id}.csv"),
        "summary": write_summary(reports, out_dir / f"{experiment_id}.summary.json"),
        "config": write_normalized_config(config, out_dir / f"{experiment_id}.config.json"),
    }
    logger.info("wrote %s", ", ".join(str(p) for p in paths.values()))
    return paths
