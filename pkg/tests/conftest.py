import copy
from pathlib import Path

import numpy as np
import pytest

from sepflux.core.functions import TestFunction, TrigFactor, TrigTerm
from sepflux.core.initcond import DensityProfile
from sepflux.core.torus import build_torus

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def cos_profile(a0: float = 0.5, amp: float = 0.25, d: int = 1) -> DensityProfile:
    """a0 + amp * cos(2 pi x_0)."""
    return DensityProfile(a0=a0, terms=(TrigTerm(amp, (TrigFactor(0, 1, "cos"),)),), d=d)


@pytest.fixture
def line4():
    return build_torus(1, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def standard_rho0():
    return cos_profile()


@pytest.fixture
def one_plus():
    return TestFunction.component(TestFunction.constant(1.0), 0, "+")


SMALL_RAW = {
    "experiment_id": "small",
    "d": 1,
    "L": 16,
    "regime": {"type": "classic", "alpha": 0.5},
    "rho0": {"a0": 0.5, "terms": [{"axis": 0, "freq": 1, "phase": "cos", "amp": 0.25}]},
    "T": 0.01,
    "sample_times": [0.005, 0.01],
    "replicas": 4,
    "seed": 99,
    "test_functions": {
        "one": {"kind": "const", "c": 1.0},
        "cos1": {"kind": "trig", "terms": [{"axis": 0, "freq": 1, "phase": "cos"}]},
        "sin1_axis0": {
            "kind": "trig",
            "terms": [{"axis": 0, "freq": 1, "phase": "sin"}],
            "component": {"axis": 0},
        },
        "one_plus": {"kind": "const", "c": 1.0, "component": {"axis": 0, "sign": "+"}},
    },
    "observables": [
        {"kind": "empirical", "phi": "one"},
        {"kind": "empirical", "phi": "cos1"},
        {"kind": "netflux", "phi": "sin1_axis0"},
        {"kind": "uniflux", "phi": "one_plus"},
        {"kind": "unicol", "phi": "one_plus"},
        {"kind": "netcol", "phi": "one"},
        {"kind": "nn", "phi": "one"},
    ],
    "martingales": [
        {"kind": "uniflux", "phi": "one_plus"},
        {"kind": "netcol", "phi": "one"},
    ],
    "checks": [
        {"type": "mean", "kind": "empirical", "phi": "one", "atol": 1.0},
        {"type": "bound", "kind": "nn", "phi": "one", "value": 100.0},
    ],
}


@pytest.fixture
def small_raw(tmp_path):
    raw = copy.deepcopy(SMALL_RAW)
    raw["output_dir"] = str(tmp_path / "out")
    return raw
