"""
Experiment configuration: JSON parsing, validation and normalisation.

validate_config collects every violation it finds before raising, so a
broken config file is reported in one pass.
"""

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .core.functions import TestFunction
from .core.initcond import DensityProfile
from .core.observables import ObservableKind, check_pairing_shape
from .core.regimes import ScalingRegime, below_fluctuation_scale, regime_from_dict, resolve_regime
from .core.torus import TorusGeometry, build_torus
from .errors import ConfigError, ConfigValidationError, SepfluxError

logger = logging.getLogger(__name__)

# default event budget as a multiple of the expected event count
BUDGET_FACTOR = 4.0
MIN_EVENT_BUDGET = 1_000_000
BUDGET_WARN_FRACTION = 0.8


class RunMode(str, Enum):
    STRICT = "strict"
    EXPLORATORY = "exploratory"


class CheckType(str, Enum):
    MEAN = "mean"
    REJECT = "reject"
    VARIANCE = "variance"
    GAUSSIAN = "gaussian"
    MARTINGALE = "martingale"
    BOUND = "bound"


@dataclass(frozen=True)
class ObservableProbe:
    kind: ObservableKind
    phi_id: str

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.phi_id}"

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "phi": self.phi_id}


@dataclass(frozen=True)
class CheckSpec:
    """
    One enabled check.

    Attributes:
        type: Check type
        probe: Observable (or martingale functional) it applies to
        times: Sample times it is evaluated at
        atol, rtol, z: Mean-check tolerances
        rel: Relative band of variance and QV checks
        statistic: "mean" or "var" for rejection checks
        alpha: Classic parameter of an alternative uniflux reference
        factor: Multiplier applied to the natural reference
        value: Explicit reference, target or bound
    """

    type: CheckType
    probe: ObservableProbe
    times: Tuple[float, ...]
    atol: float = 0.0
    rtol: float = 0.0
    z: float = 3.0
    rel: float = 0.15
    statistic: str = "mean"
    alpha: Optional[float] = None
    factor: Optional[float] = None
    value: Optional[float] = None

    def to_dict(self) -> dict:
        out: Dict[str, Any] = {
            "type": self.type.value,
            "observable": self.probe.kind.value,
            "phi": self.probe.phi_id,
            "times": list(self.times),
            "atol": self.atol,
            "rtol": self.rtol,
            "z": self.z,
            "rel": self.rel,
            "statistic": self.statistic,
        }
        for key in ("alpha", "factor", "value"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


@dataclass(frozen=True)
class OracleSpec:
    points: Tuple[Tuple[Tuple[float, ...], ...], ...]
    times: Tuple[float, ...]
    replicas: int = 100_000
    exact: bool = True

    def to_dict(self) -> dict:
        return {
            "points": [[list(p) for p in pts] for pts in self.points],
            "times": list(self.times),
            "replicas": self.replicas,
            "exact": self.exact,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Normalised experiment configuration.

    `sizes` holds the resolved (L, n) pair of every lattice size of the
    sweep; `for_size` narrows the config to one of them.
    """

    experiment_id: str
    d: int
    sizes: Tuple[Tuple[int, int], ...]
    regime: ScalingRegime
    rho0: DensityProfile
    T: float
    sample_times: Tuple[float, ...]
    test_functions: Dict[str, TestFunction]
    replicas: int
    seed: int
    observables: Tuple[ObservableProbe, ...]
    checks: Tuple[CheckSpec, ...] = ()
    martingales: Tuple[ObservableProbe, ...] = ()
    output_dir: Path = Path("out")
    event_budget: int = MIN_EVENT_BUDGET
    threads: int = 1
    mode: RunMode = RunMode.STRICT
    oracle: Optional[OracleSpec] = None
    debug_trace: bool = False
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @property
    def L(self) -> int:
        return self.sizes[0][0]

    @property
    def n(self) -> int:
        return self.sizes[0][1]

    @cached_property
    def geometry(self) -> TorusGeometry:
        return build_torus(self.d, self.L)

    @property
    def is_sweep(self) -> bool:
        return len(self.sizes) > 1

    @property
    def exploratory(self) -> bool:
        return self.mode == RunMode.EXPLORATORY or below_fluctuation_scale(self.n, self.L, self.d)

    def for_size(self, L: int) -> "ExperimentConfig":
        for size in self.sizes:
            if size[0] == L:
                return dataclasses.replace(self, sizes=(size,))
        raise ConfigError(f"L={L} is not part of this experiment")

    def expected_events(self, L: Optional[int] = None, n: Optional[int] = None) -> float:
        """E[N_p] * 2d * L^2 * T for one replica."""
        L = L or self.L
        n = n or self.n
        return n * self.rho0.l1_norm * 2 * self.d * L**2 * self.T

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "d": self.d,
            "L": [L for L, _ in self.sizes] if self.is_sweep else self.L,
            "n": [n for _, n in self.sizes] if self.is_sweep else self.n,
            "regime": self.regime.to_dict(),
            "rho0": self.rho0.to_dict(),
            "T": self.T,
            "sample_times": list(self.sample_times),
            "test_functions": {k: v.to_dict() for k, v in sorted(self.test_functions.items())},
            "replicas": self.replicas,
            "seed": self.seed,
            "observables": [p.to_dict() for p in self.observables],
            "checks": [c.to_dict() for c in self.checks],
            "martingales": [p.to_dict() for p in self.martingales],
            "output_dir": str(self.output_dir),
            "event_budget": self.event_budget,
            "threads": self.threads,
            "mode": self.mode.value,
            "oracle": self.oracle.to_dict() if self.oracle else None,
        }


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


class _Problems:
    def __init__(self) -> None:
        self.items: List[str] = []

    def add(self, message: str) -> None:
        self.items.append(message)

    def guard(self, what: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SepfluxError as exc:
            self.add(f"{what}: {exc}")
        except (TypeError, ValueError, KeyError) as exc:
            self.add(f"{what}: malformed ({exc})")
        return None


def _probe(raw: Mapping[str, Any], functions: Dict[str, TestFunction], problems: _Problems, where: str):
    try:
        kind = ObservableKind(raw.get("kind", raw.get("observable")))
    except ValueError:
        problems.add(f"{where}: unknown observable kind {raw.get('kind', raw.get('observable'))!r}")
        return None
    phi_id = raw.get("phi")
    if phi_id not in functions:
        problems.add(f"{where}: unknown test function {phi_id!r}")
        return None
    problems.guard(f"{where} ({kind.value}:{phi_id})", check_pairing_shape, kind, functions[phi_id])
    return ObservableProbe(kind, phi_id)


def _check(
    raw: Mapping[str, Any],
    functions: Dict[str, TestFunction],
    observables: Tuple[ObservableProbe, ...],
    martingales: Tuple[ObservableProbe, ...],
    sample_times: Tuple[float, ...],
    problems: _Problems,
    where: str,
) -> Optional[CheckSpec]:
    try:
        ctype = CheckType(raw.get("type"))
    except ValueError:
        problems.add(f"{where}: unknown check type {raw.get('type')!r}")
        return None
    probe = _probe(raw, functions, problems, where)
    if probe is None:
        return None
    pool = martingales if ctype == CheckType.MARTINGALE else observables
    if probe not in pool:
        target = "martingales" if ctype == CheckType.MARTINGALE else "observables"
        problems.add(f"{where}: {probe.label} is not among the enabled {target}")
    if "times" in raw:
        times = tuple(float(t) for t in raw["times"])
    elif ctype in (CheckType.MEAN, CheckType.BOUND):
        times = sample_times
    else:
        times = sample_times[-1:]
    missing = [t for t in times if t not in sample_times]
    if missing:
        problems.add(f"{where}: check times {missing} are not sample times")
    if ctype == CheckType.VARIANCE and probe.kind != ObservableKind.NET_COLLISION and "value" not in raw:
        problems.add(f"{where}: variance check on {probe.kind.value} needs an explicit 'value'")
    statistic = raw.get("statistic", "mean")
    if statistic not in ("mean", "var"):
        problems.add(f"{where}: statistic must be 'mean' or 'var'")
    if ctype == CheckType.REJECT and not any(k in raw for k in ("alpha", "factor", "value")):
        problems.add(f"{where}: rejection check needs 'alpha', 'factor' or 'value'")
    opt = {k: float(raw[k]) for k in ("alpha", "factor", "value") if k in raw}
    return CheckSpec(
        type=ctype,
        probe=probe,
        times=times,
        atol=float(raw.get("atol", 0.0)),
        rtol=float(raw.get("rtol", 0.0)),
        z=float(raw.get("z", 5.0 if ctype == CheckType.REJECT else 3.0)),
        rel=float(raw.get("rel", 0.15)),
        statistic=statistic,
        **opt,
    )


def _oracle(raw: Mapping[str, Any], d: int, problems: _Problems) -> Optional[OracleSpec]:
    point_sets = []
    for idx, pts in enumerate(raw.get("points", [])):
        parsed = []
        for p in pts:
            coords = tuple(float(v) for v in (p if isinstance(p, (list, tuple)) else [p]))
            if len(coords) != d:
                problems.add(f"oracle.points[{idx}]: point {p} is not {d}-dimensional")
            parsed.append(coords)
        point_sets.append(tuple(parsed))
    if not point_sets:
        problems.add("oracle.points required")
    times = tuple(float(t) for t in raw.get("times", []))
    if not times or any(t < 0 for t in times):
        problems.add("oracle.times must be a non-empty list of non-negative times")
    return OracleSpec(
        points=tuple(point_sets),
        times=times,
        replicas=int(raw.get("replicas", 100_000)),
        exact=bool(raw.get("exact", True)),
    )


def validate_config(
    raw: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """
    Parse and normalise a raw JSON config.

    Args:
        raw: Parsed JSON object
        overrides: Command-line values replacing JSON fields (None entries ignored)

    Returns:
        ExperimentConfig with n resolved for every lattice size

    Raises:
        ConfigValidationError: listing every violation found
    """
    merged = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    problems = _Problems()

    for key in ("d", "L", "regime", "rho0", "T", "sample_times", "test_functions"):
        if key not in merged:
            problems.add(f"{key} required")
    if problems.items:
        raise ConfigValidationError(problems.items)

    d = int(merged["d"])
    L_raw = merged["L"]
    L_values = tuple(int(v) for v in (L_raw if isinstance(L_raw, list) else [L_raw]))
    if not L_values:
        problems.add("L must be an integer or a non-empty list")
    for L in L_values:
        problems.guard(f"L={L}", build_torus, d, L)

    T = float(merged["T"])
    if T < 0 or not math.isfinite(T):
        problems.add(f"T must be finite and >= 0, got {T}")
    sample_times = tuple(float(t) for t in merged["sample_times"])
    if not sample_times:
        problems.add("sample_times must not be empty")
    if any(b <= a for a, b in zip(sample_times, sample_times[1:])):
        problems.add("sample_times must be strictly increasing")
    if sample_times and sample_times[0] < 0:
        problems.add("sample_times must be >= 0")
    if sample_times and sample_times[-1] > T:
        problems.add(f"sample time {sample_times[-1]} exceeds T={T}")

    regime = problems.guard("regime", regime_from_dict, merged["regime"])
    rho0 = problems.guard("rho0", DensityProfile.from_dict, merged["rho0"], d)

    functions: Dict[str, TestFunction] = {}
    for phi_id, desc in dict(merged["test_functions"]).items():
        phi = problems.guard(f"test_functions.{phi_id}", TestFunction.from_dict, desc)
        if phi is None:
            continue
        if phi.max_axis() >= d:
            problems.add(f"test_functions.{phi_id}: uses an axis outside dimension {d}")
        functions[phi_id] = phi

    observables = tuple(
        p
        for idx, o in enumerate(merged.get("observables", []))
        if (p := _probe(o, functions, problems, f"observables[{idx}]")) is not None
    )
    martingales = tuple(
        p
        for idx, o in enumerate(merged.get("martingales", []))
        if (p := _probe(o, functions, problems, f"martingales[{idx}]")) is not None
    )
    for p in martingales:
        if p.kind == ObservableKind.NEAREST_NEIGHBOUR:
            problems.add("martingales: the nearest-neighbour measure has no Dynkin functional")
    checks = tuple(
        c
        for idx, c_raw in enumerate(merged.get("checks", []))
        if (c := _check(c_raw, functions, observables, martingales, sample_times, problems, f"checks[{idx}]"))
        is not None
    )

    replicas = int(merged.get("replicas", 100))
    if replicas < 2:
        problems.add(f"replicas must be >= 2, got {replicas}")
    for c in checks:
        if c.type == CheckType.GAUSSIAN and replicas < 100:
            problems.add("gaussian checks need replicas >= 100")

    try:
        mode = RunMode(merged.get("mode", "strict"))
    except ValueError:
        problems.add(f"mode must be 'strict' or 'exploratory', got {merged.get('mode')!r}")
        mode = RunMode.STRICT

    oracle = _oracle(merged["oracle"], d, problems) if merged.get("oracle") else None

    sizes: List[Tuple[int, int]] = []
    if regime is not None and rho0 is not None:
        for L in L_values:
            n = problems.guard(f"regime at L={L}", resolve_regime, regime, L, d, rho0)
            if n is not None:
                sizes.append((L, n))

    if problems.items:
        raise ConfigValidationError(problems.items)

    expected = max(n * rho0.l1_norm * 2 * d * L**2 * T for L, n in sizes)
    budget = int(merged.get("event_budget", max(MIN_EVENT_BUDGET, math.ceil(BUDGET_FACTOR * expected))))
    if budget < expected:
        raise ConfigValidationError(
            [f"event_budget {budget} is below the expected {expected:.0f} events per replica"]
        )
    if expected > BUDGET_WARN_FRACTION * budget:
        logger.warning(
            "expected %.0f events per replica use more than %d%% of the budget %d",
            expected,
            int(100 * BUDGET_WARN_FRACTION),
            budget,
        )

    cfg = ExperimentConfig(
        experiment_id=str(merged.get("experiment_id", "experiment")),
        d=d,
        sizes=tuple(sizes),
        regime=regime,
        rho0=rho0,
        T=T,
        sample_times=sample_times,
        test_functions=functions,
        replicas=replicas,
        seed=int(merged.get("seed", 0)),
        observables=observables,
        checks=checks,
        martingales=martingales,
        output_dir=Path(merged.get("output_dir", "out")),
        event_budget=budget,
        threads=max(int(merged.get("threads", 1)), 1),
        mode=mode,
        oracle=oracle,
        debug_trace=bool(merged.get("debug_trace", False)),
        raw=dict(raw),
    )
    for L, n in sizes:
        if below_fluctuation_scale(n, L, d) and mode == RunMode.STRICT:
            logger.warning("L=%d, n=%d lies below eps^(-d/2): checks run in exploratory mode", L, n)
    return cfg


def load_config(path, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Read a JSON config file and validate it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return validate_config(raw, overrides)
