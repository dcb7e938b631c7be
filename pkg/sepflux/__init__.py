from .base import Base
from .config import ExperimentConfig, load_config, validate_config
from .core.dual import estimate_kpoint, exact_kpoint, stirring_step
from .core.engine import advance_to, run_replica, step_event
from .core.functions import TestFunction
from .core.initcond import DensityProfile, sample_initial
from .core.limits import LimitField, eval_rho, limit_netflux, limit_unicol, limit_uniflux
from .core.regimes import ClassicRegime, SparseRegime, resolve_regime
from .core.stats import SummaryStats, compare_to_reference, gaussianity_check, summarize
from .core.torus import TorusGeometry, build_torus
from .errors import ConfigError, SepfluxError, SimulationError, StatisticsError
from .oracle import run_oracle
from .report import Report
from .runner import run_experiment, run_sweep
from .store import CheckResult, ExperimentRun, ObservableSummary, RunStatus

__version__ = "0.1.0"

__all__ = [
    "Base",
    "ExperimentConfig",
    "load_config",
    "validate_config",
    "estimate_kpoint",
    "exact_kpoint",
    "stirring_step",
    "advance_to",
    "run_replica",
    "step_event",
    "TestFunction",
    "DensityProfile",
    "sample_initial",
    "LimitField",
    "eval_rho",
    "limit_netflux",
    "limit_unicol",
    "limit_uniflux",
    "ClassicRegime",
    "SparseRegime",
    "resolve_regime",
    "SummaryStats",
    "compare_to_reference",
    "gaussianity_check",
    "summarize",
    "TorusGeometry",
    "build_torus",
    "ConfigError",
    "SepfluxError",
    "SimulationError",
    "StatisticsError",
    "run_oracle",
    "Report",
    "run_experiment",
    "run_sweep",
    "CheckResult",
    "ExperimentRun",
    "ObservableSummary",
    "RunStatus",
]
