import json

import pytest

from sepflux.config import validate_config
from sepflux.errors import ConfigError
from sepflux.oracle import run_oracle

from .conftest import CONFIG_DIR


@pytest.fixture
def oracle_raw():
    raw = json.loads((CONFIG_DIR / "oracle.json").read_text(encoding="utf-8"))
    raw["oracle"]["replicas"] = 20_000
    return raw


def test_estimate_agrees_with_exact(oracle_raw):
    records = run_oracle(validate_config(oracle_raw))
    assert [r["L"] for r in records] == [8, 16]
    for record in records:
        assert record["stderr"] > 0
        assert abs(record["estimate"] - record["exact"]) < 5 * record["stderr"]
        assert record["sites"] == [record["L"] // 4, record["L"] // 2]


def test_rescaled_exact_approaches_the_limit(oracle_raw):
    coarse, fine = run_oracle(validate_config(oracle_raw))
    # n = L here, so the rescaling is the identity
    assert coarse["rescaled_exact"] == pytest.approx(coarse["exact"])
    deviation = [abs(r["rescaled_exact"] - r["limit_product"]) for r in (coarse, fine)]
    assert deviation[1] < deviation[0]


def test_monte_carlo_only(oracle_raw):
    oracle_raw["oracle"]["exact"] = False
    oracle_raw["oracle"]["points"] = [[0.0, 0.25, 0.5]]
    oracle_raw["oracle"]["replicas"] = 2_000
    records = run_oracle(validate_config(oracle_raw))
    assert all(r["exact"] is None and r["rescaled_exact"] is None for r in records)
    assert all(0.0 < r["estimate"] < 1.0 for r in records)


def test_config_without_oracle(small_raw):
    with pytest.raises(ConfigError):
        run_oracle(validate_config(small_raw))
