import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepflux.core.stats import (
    CheckStatus,
    SummaryStats,
    compare_bound,
    compare_to_reference,
    compare_variance,
    gaussian_record,
    gaussianity_check,
    reject_reference,
    summarize,
)
from sepflux.errors import DegenerateSample, InsufficientSamples


def test_constant_sample():
    s = summarize([1, 1, 1, 1])
    assert s.mean == 1.0
    assert s.var == 0.0
    assert s.stderr == 0.0


def test_two_point_sample():
    s = summarize([0, 2])
    assert s.mean == 1.0
    assert s.var == 2.0
    assert s.stderr == pytest.approx(1.0)
    assert s.var_stderr == float("inf")


def test_too_few_samples():
    with pytest.raises(InsufficientSamples):
        summarize([3.0])


def test_chunked_summary_matches_single_pass():
    x = np.random.default_rng(1).normal(size=10_000)
    s = summarize(x)
    assert s.count == 10_000
    assert s.mean == pytest.approx(x.mean())
    assert s.var == pytest.approx(x.var(ddof=1))
    assert s.m4 == pytest.approx(np.sum((x - x.mean()) ** 4))


@given(
    values=st.lists(st.integers(-50, 50), min_size=2, max_size=40),
    cut=st.integers(0, 40),
)
@settings(max_examples=100, deadline=None)
def test_merge_is_exact(values, cut):
    cut = min(cut, len(values))
    merged = SummaryStats.of_batch(values[:cut]).merge(SummaryStats.of_batch(values[cut:]))
    direct = SummaryStats.of_batch(values)
    assert merged.count == direct.count
    dev = np.abs(np.asarray(values, dtype=float) - direct.mean)
    for attr, power in (("mean", 1), ("m2", 2), ("m3", 3), ("m4", 4)):
        scale = 1.0 + float(np.sum(dev**power))
        assert getattr(merged, attr) == pytest.approx(getattr(direct, attr), abs=1e-9 * scale)


def test_gaussian_sample_passes():
    x = np.random.default_rng(2024).normal(size=2000)
    result = gaussianity_check(x)
    assert result.passed
    assert abs(result.skew_z) < 4 and abs(result.kurt_z) < 4


def test_exponential_sample_fails():
    x = np.random.default_rng(2024).exponential(size=2000)
    result = gaussianity_check(x)
    assert not result.passed
    assert result.skew_z > 4


def test_gaussianity_needs_spread_and_size():
    with pytest.raises(DegenerateSample):
        gaussianity_check(np.ones(100))
    with pytest.raises(InsufficientSamples):
        gaussianity_check(np.random.default_rng(0).normal(size=50))


def test_compare_to_reference():
    s = summarize([0, 2])
    assert compare_to_reference(s, 1.5).passed
    strict = compare_to_reference(s, 1.5, z=0.1)
    assert not strict.passed
    assert strict.abs_err == pytest.approx(0.5)
    assert strict.status == CheckStatus.FAIL
    assert compare_to_reference(s, 1.5, atol=0.6, z=0.1).passed
    assert compare_to_reference(s, 10.0, rtol=0.95).passed


def test_exploratory_records_are_informational():
    record = compare_to_reference(summarize([0, 2]), 100.0)
    record.exploratory = True
    assert not record.passed
    assert record.status == CheckStatus.INFO
    assert record.to_dict()["status"] == "info"


def test_compare_variance():
    s = summarize([0, 2])
    assert compare_variance(s, 1.8).passed
    assert not compare_variance(s, 1.0).passed


def test_reject_reference():
    x = np.random.default_rng(5).normal(size=400)
    s = summarize(x)
    assert reject_reference(s, 1.0).passed
    assert not reject_reference(s, 0.0).passed
    assert reject_reference(s, 2.0, statistic="var").passed


def test_reject_without_spread():
    s = summarize([1.0, 1.0, 1.0, 1.0])
    assert s.stderr == 0.0
    assert not reject_reference(s, 1.0).passed
    assert reject_reference(s, 1.0 + 1e-9).passed


def test_compare_bound():
    s = summarize([0, 2])
    assert compare_bound(s, 1.0).passed
    assert not compare_bound(s, -5.0).passed


def test_gaussian_record():
    x = np.random.default_rng(2024).normal(size=2000)
    record = gaussian_record(summarize(x))
    assert record.passed
    assert record.reference is None
    assert set(record.operands) == {"skew_z", "kurt_z", "pass"}
