"""
Exact continuous-time simulation of the symmetric exclusion process.

Every particle attempts each of the 2d directions at rate eps^-2, so the
total attempt rate N_p * 2d * L^2 depends only on the conserved particle
number. An event picks a particle and a direction uniformly; the attempt
becomes a jump when the target is empty and a collision otherwise.

Registered linear functionals are carried along with their current value,
their generator drift Q F and their square field G_2 F. Both integrands
are constant between events, so the Dynkin integrals are exact. Rates are
updated incrementally on the directed edges touching the two sites of a
jump; the numerical kernels are JIT-compiled and release the GIL so that
replicas can run on threads.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from ..errors import (
    BudgetError,
    CounterOverflow,
    EmptySystem,
    PathwiseIdentityError,
    UsageError,
)
from .initcond import sample_initial
from .observables import (
    Functional,
    ObservableKind,
    build_functional,
    closed_form_moment,
    pair_empirical,
    pair_nn_measure,
)
from .state import Configuration, CounterField
from .torus import TorusGeometry

if TYPE_CHECKING:
    from ..config import ExperimentConfig

logger = logging.getLogger(__name__)

MAX_COUNT = np.iinfo(np.int64).max
TRACE_CAPACITY = 100_000

TRACE_DTYPE = np.dtype([("time", "<f8"), ("edge", "<u4"), ("kind", "u1")])

STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_OVERFLOW = 2


class EventKind(str, Enum):
    JUMP = "jump"
    COLLISION = "collision"


@dataclass(frozen=True)
class EventRecord:
    time: float
    edge: int
    kind: EventKind

    def to_dict(self) -> dict:
        return {"time": self.time, "edge": self.edge, "kind": self.kind.value}


# ---------------------------------------------------------------------------
# JIT kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _edge_rates(e, sign, occ, nbr, nd, L2, w_jump, w_col, drift, square):
    a = e // nd
    if occ[a] == 0:
        return
    b = nbr[a, e % nd]
    if occ[b] == 0:
        for f in range(w_jump.shape[0]):
            w = w_jump[f, e]
            drift[f] += sign * L2 * w
            square[f] += sign * L2 * w * w
    else:
        for f in range(w_col.shape[0]):
            w = w_col[f, e]
            drift[f] += sign * L2 * w
            square[f] += sign * L2 * w * w


@njit(cache=True, nogil=True)
def _touch(x, y, sign, occ, nbr, nd, L2, w_jump, w_col, drift, square):
    # every directed edge incident to x or y exactly once
    for k in range(nd):
        _edge_rates(x * nd + k, sign, occ, nbr, nd, L2, w_jump, w_col, drift, square)
        z = nbr[x, k]
        _edge_rates(z * nd + (k ^ 1), sign, occ, nbr, nd, L2, w_jump, w_col, drift, square)
    for k in range(nd):
        z = nbr[y, k]
        if z == x:
            continue
        _edge_rates(y * nd + k, sign, occ, nbr, nd, L2, w_jump, w_col, drift, square)
        _edge_rates(z * nd + (k ^ 1), sign, occ, nbr, nd, L2, w_jump, w_col, drift, square)


@njit(cache=True, nogil=True)
def _apply_attempt(
    i, k, occ, particles, slots, nbr, nd, L2,
    attempts, jumps, collisions, w_jump, w_col, values, drift, square,
):
    x = particles[i]
    y = nbr[x, k]
    e = x * nd + k
    attempts[e] += 1
    if occ[y] == 0:
        tracked = w_jump.shape[0] > 0
        if tracked:
            _touch(x, y, -1.0, occ, nbr, nd, L2, w_jump, w_col, drift, square)
        occ[x] = 0
        occ[y] = 1
        particles[i] = y
        slots[y] = i
        slots[x] = -1
        if tracked:
            _touch(x, y, 1.0, occ, nbr, nd, L2, w_jump, w_col, drift, square)
        jumps[e] += 1
        for f in range(values.shape[0]):
            values[f] += w_jump[f, e]
        return e, 0
    collisions[e] += 1
    for f in range(values.shape[0]):
        values[f] += w_col[f, e]
    return e, 1


@njit(cache=True, nogil=True)
def _advance(
    rg, t, t_target, occ, particles, slots, nbr, nd, L2,
    attempts, jumps, collisions, w_jump, w_col, values, drift, square,
    drift_int, square_int, budget, events_before,
    trace_time, trace_edge, trace_kind, trace_len,
):
    n_p = particles.shape[0]
    events = 0
    if n_p == 0:
        dt = t_target - t
        for f in range(values.shape[0]):
            drift_int[f] += drift[f] * dt
            square_int[f] += square[f] * dt
        return t_target, events, STATUS_OK, trace_len
    total = n_p * nd * L2
    while True:
        # inverse transform on (0, 1]
        dt = -np.log(1.0 - rg.random()) / total
        if t + dt > t_target:
            rem = t_target - t
            for f in range(values.shape[0]):
                drift_int[f] += drift[f] * rem
                square_int[f] += square[f] * rem
            return t_target, events, STATUS_OK, trace_len
        if events >= budget:
            return t, events, STATUS_BUDGET, trace_len
        if events_before + events >= MAX_COUNT:
            return t, events, STATUS_OVERFLOW, trace_len
        for f in range(values.shape[0]):
            drift_int[f] += drift[f] * dt
            square_int[f] += square[f] * dt
        t += dt
        i = rg.integers(0, n_p)
        k = rg.integers(0, nd)
        e, kind = _apply_attempt(
            i, k, occ, particles, slots, nbr, nd, L2,
            attempts, jumps, collisions, w_jump, w_col, values, drift, square,
        )
        events += 1
        if trace_len < trace_time.shape[0]:
            trace_time[trace_len] = t
            trace_edge[trace_len] = e
            trace_kind[trace_len] = kind
            trace_len += 1


# ---------------------------------------------------------------------------
# Accumulators and traces
# ---------------------------------------------------------------------------


@dataclass
class DynkinAccumulators:
    """
    Running value, drift and square field of registered functionals.

    Attributes:
        functionals: Registered functionals, in registration order
        values: Current F(t), updated per event
        initial: F(0)
        drift: Current (Q F)(Z(t))
        square_field: Current (G_2 F)(Z(t))
        drift_integral: int_0^t Q F ds
        square_field_integral: int_0^t G_2 F ds
    """

    functionals: List[Functional]
    jump_weights: np.ndarray
    collision_weights: np.ndarray
    values: np.ndarray
    initial: np.ndarray
    drift: np.ndarray
    square_field: np.ndarray
    drift_integral: np.ndarray
    square_field_integral: np.ndarray

    @classmethod
    def register(
        cls,
        functionals: Sequence[Functional],
        state: Configuration,
        counters: CounterField,
        geom: TorusGeometry,
    ) -> "DynkinAccumulators":
        functionals = list(functionals)
        F = len(functionals)
        if F:
            jump_weights = np.vstack([f.jump_increments for f in functionals])
            collision_weights = np.vstack([f.collision_increments for f in functionals])
        else:
            jump_weights = np.zeros((0, geom.n_edges))
            collision_weights = np.zeros((0, geom.n_edges))
        values = np.array([f.value(state, counters) for f in functionals], dtype=float)
        acc = cls(
            functionals=functionals,
            jump_weights=np.ascontiguousarray(jump_weights, dtype=float),
            collision_weights=np.ascontiguousarray(collision_weights, dtype=float),
            values=values,
            initial=values.copy(),
            drift=np.zeros(F),
            square_field=np.zeros(F),
            drift_integral=np.zeros(F),
            square_field_integral=np.zeros(F),
        )
        acc.resync(state)
        return acc

    @classmethod
    def empty(cls, state: Configuration, geom: TorusGeometry) -> "DynkinAccumulators":
        return cls.register([], state, CounterField.zeros(geom), geom)

    @property
    def labels(self) -> List[str]:
        return [f.label for f in self.functionals]

    def resync(self, state: Configuration) -> None:
        """Recompute the current drift and square field from scratch."""
        for idx, functional in enumerate(self.functionals):
            self.drift[idx] = closed_form_moment(functional, state, 1)
            self.square_field[idx] = closed_form_moment(functional, state, 2)

    def integrate(self, dt: float) -> None:
        self.drift_integral += self.drift * dt
        self.square_field_integral += self.square_field * dt

    def martingales(self) -> np.ndarray:
        """M(t) = F(t) - F(0) - int_0^t Q F ds."""
        return self.values - self.initial - self.drift_integral


@dataclass
class EventTrace:
    """First events of a run, dumped as packed little-endian records."""

    capacity: int = TRACE_CAPACITY
    time: np.ndarray = field(init=False)
    edge: np.ndarray = field(init=False)
    kind: np.ndarray = field(init=False)
    length: int = 0

    def __post_init__(self) -> None:
        self.time = np.zeros(self.capacity, dtype=np.float64)
        self.edge = np.zeros(self.capacity, dtype=np.uint32)
        self.kind = np.zeros(self.capacity, dtype=np.uint8)

    def records(self) -> np.ndarray:
        out = np.empty(self.length, dtype=TRACE_DTYPE)
        out["time"] = self.time[: self.length]
        out["edge"] = self.edge[: self.length]
        out["kind"] = self.kind[: self.length]
        return out

    def write(self, path) -> None:
        self.records().tofile(path)

    @staticmethod
    def read(path) -> np.ndarray:
        return np.fromfile(path, dtype=TRACE_DTYPE)


_NO_TRACE = (np.zeros(0, np.float64), np.zeros(0, np.uint32), np.zeros(0, np.uint8))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def total_rate(state: Configuration, geom: TorusGeometry) -> float:
    """N_p * 2d * L^2."""
    return float(state.n_particles * geom.n_directions * geom.L**2)


def step_event(
    state: Configuration,
    counters: CounterField,
    rng: np.random.Generator,
    geom: TorusGeometry,
    accumulators: Optional[DynkinAccumulators] = None,
    choice: Optional[Tuple[int, int]] = None,
) -> EventRecord:
    """
    Execute one event of the dynamics.

    Args:
        state: Configuration, advanced in place
        counters: Edge counters, incremented in place
        rng: Random stream
        geom: Torus geometry
        accumulators: Optional Dynkin accumulators to advance
        choice: Forced (particle slot, direction index); drawn uniformly if None

    Returns:
        EventRecord of the executed attempt

    Raises:
        EmptySystem: no particle to move
    """
    if state.n_particles == 0:
        raise EmptySystem("no particles: the process has no events")
    acc = accumulators or DynkinAccumulators.empty(state, geom)
    dt = -np.log(1.0 - rng.random()) / total_rate(state, geom)
    if choice is None:
        i = int(rng.integers(0, state.n_particles))
        k = int(rng.integers(0, geom.n_directions))
    else:
        i, k = choice
    acc.integrate(dt)
    state.t += dt
    e, kind = _apply_attempt(
        i, k, state.occupancy, state.particles, state.slots, geom.neighbours,
        geom.n_directions, float(geom.L**2),
        counters.attempts, counters.jumps, counters.collisions,
        acc.jump_weights, acc.collision_weights, acc.values, acc.drift, acc.square_field,
    )
    counters.events += 1
    return EventRecord(
        time=state.t,
        edge=int(e),
        kind=EventKind.JUMP if kind == 0 else EventKind.COLLISION,
    )


def advance_to(
    state: Configuration,
    counters: CounterField,
    accumulators: DynkinAccumulators,
    t_target: float,
    rng: np.random.Generator,
    geom: TorusGeometry,
    budget: Optional[int] = None,
    trace: Optional[EventTrace] = None,
) -> Configuration:
    """
    Run events until the next one would fall after t_target.

    The clock ends exactly at t_target; the last partial interval enters the
    time integrals without producing an event.

    Raises:
        UsageError: t_target lies in the past
        BudgetError: more than `budget` events would be needed
        CounterOverflow: the 64-bit event count would overflow
    """
    if t_target < state.t:
        raise UsageError(f"cannot advance backwards from t={state.t} to {t_target}")
    remaining = MAX_COUNT if budget is None else max(int(budget), 0)
    trace_arrays = (trace.time, trace.edge, trace.kind) if trace else _NO_TRACE
    trace_len = trace.length if trace else 0
    t, events, status, trace_len = _advance(
        rng, state.t, float(t_target),
        state.occupancy, state.particles, state.slots, geom.neighbours,
        geom.n_directions, float(geom.L**2),
        counters.attempts, counters.jumps, counters.collisions,
        accumulators.jump_weights, accumulators.collision_weights,
        accumulators.values, accumulators.drift, accumulators.square_field,
        accumulators.drift_integral, accumulators.square_field_integral,
        remaining, counters.events, *trace_arrays, trace_len,
    )
    state.t = float(t)
    counters.events += int(events)
    if trace is not None:
        trace.length = int(trace_len)
    if status == STATUS_BUDGET:
        raise BudgetError(
            f"event budget exhausted at t={state.t:.6g} before reaching {t_target}",
            {"t_reached": state.t, "t_target": t_target, "events": counters.events},
        )
    if status == STATUS_OVERFLOW:
        raise CounterOverflow(f"event count reached {MAX_COUNT}")
    accumulators.resync(state)
    return state


# ---------------------------------------------------------------------------
# Replicas
# ---------------------------------------------------------------------------


def replica_rng(master_seed: int, replica_id: int) -> np.random.Generator:
    """Independent stream keyed by (master_seed, replica_id)."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(replica_id)]))


@dataclass
class ReplicaResult:
    """
    Observable samples of one replica.

    Attributes:
        samples: t -> observable label -> pairing value
        martingales: t -> functional label -> (M(t), int_0^t G_2 ds)
        audits: number of pathwise identity checks passed
    """

    replica_id: int
    n_particles: int
    events: int
    attempts_total: int
    samples: Dict[float, Dict[str, float]]
    martingales: Dict[float, Dict[str, Tuple[float, float]]]
    audits: int
    runtime: float

    def to_dict(self) -> dict:
        return {
            "replica_id": self.replica_id,
            "n_particles": self.n_particles,
            "events": self.events,
            "attempts_total": self.attempts_total,
            "samples": {str(t): v for t, v in self.samples.items()},
            "martingales": {
                str(t): {k: list(v) for k, v in m.items()} for t, m in self.martingales.items()
            },
            "audits": self.audits,
            "runtime": self.runtime,
        }


def audit_pathwise(
    initial: Configuration,
    state: Configuration,
    counters: CounterField,
    geom: TorusGeometry,
    accumulators: Optional[DynkinAccumulators] = None,
) -> int:
    """
    Check the exact pathwise identities; returns the number of checks passed.

    Raises:
        PathwiseIdentityError: any identity fails
    """
    if np.any(counters.attempts != counters.jumps + counters.collisions):
        raise PathwiseIdentityError("attempts != jumps + collisions on some edge")
    if int(counters.attempts.sum()) != counters.events:
        raise PathwiseIdentityError("sum of attempts differs from the event count")
    inflow = np.zeros(geom.n_sites, dtype=np.int64)
    np.add.at(inflow, geom.edge_targets, counters.jumps)
    outflow = counters.jumps.reshape(geom.n_sites, geom.n_directions).sum(axis=1)
    delta = state.occupancy.astype(np.int64) - initial.occupancy.astype(np.int64)
    if np.any(delta != inflow - outflow):
        raise PathwiseIdentityError("discrete continuity equation violated")
    if state.n_particles != initial.n_particles or not state.is_consistent():
        raise PathwiseIdentityError("particle number or index structures corrupted")
    checks = 4
    if accumulators is not None and accumulators.functionals:
        direct = np.array([f.value(state, counters) for f in accumulators.functionals])
        if not np.allclose(direct, accumulators.values, rtol=1e-9, atol=1e-9):
            raise PathwiseIdentityError("tracked functional values drifted from direct pairing")
        checks += 1
    return checks


def _observe(
    cfg: "ExperimentConfig",
    geom: TorusGeometry,
    state: Configuration,
    counters: CounterField,
    functionals: Dict[str, Functional],
) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for probe in cfg.observables:
        phi = cfg.test_functions[probe.phi_id]
        if probe.kind == ObservableKind.EMPIRICAL:
            value = pair_empirical(phi, state, cfg.n, geom)
        elif probe.kind == ObservableKind.NEAREST_NEIGHBOUR:
            value = pair_nn_measure(phi, state, cfg.n, geom)
        else:
            value = functionals[probe.label].counter_value(counters)
        out[probe.label] = value
    return out


def run_replica(
    cfg: "ExperimentConfig", replica_id: int, trace: Optional[EventTrace] = None
) -> ReplicaResult:
    """
    Run one replica from a fresh initial sample through every sample time.

    The result is a deterministic function of (cfg.seed, replica_id).
    """
    started = time.perf_counter()
    geom = cfg.geometry
    rng = replica_rng(cfg.seed, replica_id)
    state = sample_initial(cfg.rho0, cfg.n, geom, rng)
    initial = state.copy()
    counters = CounterField.zeros(geom)

    functionals = {
        probe.label: build_functional(probe.kind, cfg.test_functions[probe.phi_id], geom, cfg.n, probe.phi_id)
        for probe in cfg.observables
        if probe.kind not in (ObservableKind.EMPIRICAL, ObservableKind.NEAREST_NEIGHBOUR)
    }
    tracked = [
        build_functional(probe.kind, cfg.test_functions[probe.phi_id], geom, cfg.n, probe.phi_id)
        for probe in cfg.martingales
    ]
    acc = DynkinAccumulators.register(tracked, state, counters, geom)

    samples: Dict[float, Dict[str, float]] = {}
    martingales: Dict[float, Dict[str, Tuple[float, float]]] = {}
    audits = 0
    for t in cfg.sample_times:
        remaining = cfg.event_budget - counters.events
        advance_to(state, counters, acc, t, rng, geom, budget=remaining, trace=trace)
        audits += audit_pathwise(initial, state, counters, geom, acc)
        samples[t] = _observe(cfg, geom, state, counters, functionals)
        m = acc.martingales()
        martingales[t] = {
            label: (float(m[idx]), float(acc.square_field_integral[idx]))
            for idx, label in enumerate(acc.labels)
        }
        logger.debug("replica %d t=%g events=%d audits ok", replica_id, t, counters.events)

    return ReplicaResult(
        replica_id=replica_id,
        n_particles=state.n_particles,
        events=counters.events,
        attempts_total=int(counters.attempts.sum()),
        samples=samples,
        martingales=martingales,
        audits=audits,
        runtime=time.perf_counter() - started,
    )
