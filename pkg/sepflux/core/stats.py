"""
Cross-replica statistics and the pass/fail comparisons built on them.

Summaries carry central moment sums up to fourth order and merge exactly
(pairwise update formulas), so replicas can be reduced in any grouping.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, Optional

import numpy as np
from typing_extensions import Self

from ..errors import DegenerateSample, InsufficientSamples

logger = logging.getLogger(__name__)

# batch size for the vectorised moment pass before pairwise merging
_CHUNK = 4096

GAUSSIAN_Z = 4.0


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INFO = "info"


@dataclass(frozen=True)
class SummaryStats:
    """
    Count, mean and central moment sums M2, M3, M4 of a sample.

    Attributes:
        count: Sample size R
        mean: Sample mean
        m2: sum (x - mean)^2
        m3: sum (x - mean)^3
        m4: sum (x - mean)^4
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def of_batch(cls, values) -> Self:
        x = np.asarray(values, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mean = float(x.mean())
        dev = x - mean
        sq = dev * dev
        return cls(
            count=int(x.size),
            mean=mean,
            m2=float(sq.sum()),
            m3=float((sq * dev).sum()),
            m4=float((sq * sq).sum()),
        )

    def merge(self, other: "SummaryStats") -> "SummaryStats":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        na, nb = float(self.count), float(other.count)
        n = na + nb
        delta = other.mean - self.mean
        d2 = delta * delta
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (
            self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / n**2
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / n**2
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n
        )
        return SummaryStats(self.count + other.count, mean, m2, m3, m4)

    __add__ = merge

    @property
    def var(self) -> float:
        """Unbiased variance."""
        if self.count < 2:
            return 0.0
        return max(self.m2, 0.0) / (self.count - 1)

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return 0.0
        return float(np.sqrt(self.var / self.count))

    @property
    def var_stderr(self) -> float:
        """Standard error of the unbiased variance from the fourth moment."""
        if self.count < 4:
            return float("inf")
        R = self.count
        mu4 = self.m4 / R
        s2 = self.var
        spread = mu4 - s2 * s2 * (R - 3) / (R - 1)
        return float(np.sqrt(max(spread, 0.0) / R))

    @property
    def skewness(self) -> float:
        if self.m2 <= 0:
            return 0.0
        return float(np.sqrt(self.count) * self.m3 / self.m2**1.5)

    @property
    def excess_kurtosis(self) -> float:
        if self.m2 <= 0:
            return 0.0
        return float(self.count * self.m4 / self.m2**2 - 3.0)

    @property
    def skew_z(self) -> float:
        return self.skewness / float(np.sqrt(6.0 / self.count))

    @property
    def kurt_z(self) -> float:
        return self.excess_kurtosis / float(np.sqrt(24.0 / self.count))

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "var": self.var,
            "stderr": self.stderr,
            "var_stderr": self.var_stderr if self.count >= 4 else None,
        }


def summarize(values: Iterable[float]) -> SummaryStats:
    """
    Moments of a sample, accumulated batch by batch with exact merging.

    Raises:
        InsufficientSamples: fewer than two values
    """
    x = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    x = x.ravel()
    if x.size < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {x.size}")
    out = SummaryStats()
    for start in range(0, x.size, _CHUNK):
        out = out.merge(SummaryStats.of_batch(x[start : start + _CHUNK]))
    return out


@dataclass(frozen=True)
class GaussianityResult:
    skew_z: float
    kurt_z: float
    passed: bool

    def to_dict(self) -> dict:
        return {"skew_z": self.skew_z, "kurt_z": self.kurt_z, "pass": self.passed}


def gaussianity_check(values, limit: float = GAUSSIAN_Z) -> GaussianityResult:
    """
    Skewness and excess-kurtosis z-scores against a normal null.

    Raises:
        InsufficientSamples: fewer than 100 values
        DegenerateSample: zero variance
    """
    summary = values if isinstance(values, SummaryStats) else summarize(values)
    if summary.count < 100:
        raise InsufficientSamples(f"shape diagnostics need R >= 100, got {summary.count}")
    if summary.m2 <= 0:
        raise DegenerateSample("all values are equal")
    skew_z, kurt_z = summary.skew_z, summary.kurt_z
    return GaussianityResult(
        skew_z=skew_z, kurt_z=kurt_z, passed=abs(skew_z) < limit and abs(kurt_z) < limit
    )


@dataclass
class CheckRecord:
    """Verdict of one check with every operand kept for reporting."""

    check: str
    statistic: str
    value: float
    reference: Optional[float]
    tolerance: float
    passed: bool
    operands: Dict[str, Any] = field(default_factory=dict)
    exploratory: bool = False

    @property
    def abs_err(self) -> Optional[float]:
        if self.reference is None:
            return None
        return abs(self.value - self.reference)

    @property
    def status(self) -> CheckStatus:
        if self.exploratory:
            return CheckStatus.INFO
        return CheckStatus.PASS if self.passed else CheckStatus.FAIL

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "statistic": self.statistic,
            "value": self.value,
            "reference": self.reference,
            "abs_err": self.abs_err,
            "tolerance": self.tolerance,
            "status": self.status.value,
            "operands": self.operands,
        }


def compare_to_reference(
    summary: SummaryStats,
    reference: float,
    atol: float = 0.0,
    z: float = 3.0,
    rtol: float = 0.0,
) -> CheckRecord:
    """Pass iff |mean - reference| <= max(atol, rtol*|reference|, z*stderr)."""
    tolerance = max(atol, rtol * abs(reference), z * summary.stderr)
    err = abs(summary.mean - reference)
    return CheckRecord(
        check="mean",
        statistic="mean",
        value=summary.mean,
        reference=float(reference),
        tolerance=tolerance,
        passed=bool(err <= tolerance),
        operands={"stderr": summary.stderr, "atol": atol, "rtol": rtol, "z": z, "R": summary.count},
    )


def compare_variance(summary: SummaryStats, target: float, rel: float = 0.15) -> CheckRecord:
    """Pass iff the sample variance lies within a relative band around target."""
    tolerance = rel * abs(target)
    return CheckRecord(
        check="variance",
        statistic="var",
        value=summary.var,
        reference=float(target),
        tolerance=tolerance,
        passed=bool(abs(summary.var - target) <= tolerance),
        operands={"var_stderr": summary.var_stderr, "rel": rel, "R": summary.count},
    )


def reject_reference(
    summary: SummaryStats,
    reference: float,
    z: float = 5.0,
    statistic: str = "mean",
) -> CheckRecord:
    """Pass iff the reference lies at least z standard errors away."""
    if statistic == "var":
        value, spread = summary.var, summary.var_stderr
    else:
        value, spread = summary.mean, summary.stderr
    distance = abs(value - reference)
    # without spread any difference at all rejects the reference
    passed = distance >= z * spread if spread > 0 else distance > 0
    return CheckRecord(
        check="reject",
        statistic=statistic,
        value=value,
        reference=float(reference),
        tolerance=z * spread,
        passed=bool(passed),
        operands={"stderr": spread, "z": z, "distance_in_se": distance / spread if spread else None},
    )


def compare_bound(summary: SummaryStats, bound: float, z: float = 3.0) -> CheckRecord:
    """Pass iff mean <= bound + z*stderr."""
    tolerance = z * summary.stderr
    return CheckRecord(
        check="bound",
        statistic="mean",
        value=summary.mean,
        reference=float(bound),
        tolerance=tolerance,
        passed=bool(summary.mean <= bound + tolerance),
        operands={"stderr": summary.stderr, "z": z},
    )


def gaussian_record(summary: SummaryStats, limit: float = GAUSSIAN_Z) -> CheckRecord:
    result = gaussianity_check(summary, limit)
    return CheckRecord(
        check="gaussian",
        statistic="shape",
        value=max(abs(result.skew_z), abs(result.kurt_z)),
        reference=None,
        tolerance=limit,
        passed=result.passed,
        operands=result.to_dict(),
    )
