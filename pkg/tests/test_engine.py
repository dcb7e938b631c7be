import numpy as np
import pytest

from sepflux.config import validate_config
from sepflux.core.engine import (
    TRACE_DTYPE,
    DynkinAccumulators,
    EventKind,
    EventTrace,
    advance_to,
    audit_pathwise,
    replica_rng,
    run_replica,
    step_event,
    total_rate,
)
from sepflux.core.functions import TestFunction
from sepflux.core.observables import ObservableKind, build_functional, generator_moment
from sepflux.core.state import Configuration, CounterField
from sepflux.core.torus import build_torus
from sepflux.errors import BudgetError, EmptySystem, PathwiseIdentityError, UsageError

SIGNED_1D = TestFunction.table(
    {(0, "+"): TestFunction.cos(), (0, "-"): TestFunction.sin(amp=0.5).plus(TestFunction.constant(0.2))}
)
SIN_AXIS0 = TestFunction.component(TestFunction.sin(), 0)
COS_AXIS0 = TestFunction.component(TestFunction.cos(), 0)


def _tracked(geom, n):
    return [
        build_functional(ObservableKind.EMPIRICAL, TestFunction.cos(), geom, n, "cos1"),
        build_functional(ObservableKind.UNI_FLUX, SIGNED_1D, geom, n, "signed"),
        build_functional(ObservableKind.UNI_COLLISION, SIGNED_1D, geom, n, "signed"),
        build_functional(ObservableKind.NET_FLUX, SIN_AXIS0, geom, n, "sin1"),
        build_functional(ObservableKind.NET_COLLISION, COS_AXIS0, geom, n, "cos1"),
    ]


def test_total_rate(line4):
    assert total_rate(Configuration.from_sites(line4, [0, 1]), line4) == 64.0
    square = build_torus(2, 3)
    assert total_rate(Configuration.from_sites(square, range(5)), square) == 180.0


def test_forced_jump_and_collision(line4, rng):
    state = Configuration.from_sites(line4, [0])
    counters = CounterField.zeros(line4)
    event = step_event(state, counters, rng, line4, choice=(0, 0))
    assert event.kind == EventKind.JUMP
    assert event.edge == 0
    assert state.occupancy.tolist() == [0, 1, 0, 0]
    assert counters.jumps[0] == 1 and counters.events == 1
    assert state.t > 0.0

    pair = Configuration.from_sites(line4, [0, 1])
    counters = CounterField.zeros(line4)
    event = step_event(pair, counters, rng, line4, choice=(0, 0))
    assert event.kind == EventKind.COLLISION
    assert counters.collisions[0] == 1
    assert pair.occupancy.tolist() == [1, 1, 0, 0]


def test_forced_jump_wraps_around(line4, rng):
    state = Configuration.from_sites(line4, [0])
    step_event(state, CounterField.zeros(line4), rng, line4, choice=(0, 1))
    assert state.particles.tolist() == [3]
    assert state.is_consistent()


def test_empty_system_has_no_events(line4, rng):
    with pytest.raises(EmptySystem):
        step_event(Configuration.from_sites(line4, []), CounterField.zeros(line4), rng, line4)


def test_empty_system_advances_the_clock(line4, rng):
    state = Configuration.from_sites(line4, [])
    counters = CounterField.zeros(line4)
    acc = DynkinAccumulators.register(_tracked(line4, 2), state, counters, line4)
    advance_to(state, counters, acc, 0.5, rng, line4)
    assert state.t == 0.5
    assert counters.events == 0
    np.testing.assert_array_equal(acc.drift_integral, 0.0)


def test_single_particle_never_collides(rng):
    geom = build_torus(1, 8)
    state = Configuration.from_sites(geom, [3])
    counters = CounterField.zeros(geom)
    acc = DynkinAccumulators.empty(state, geom)
    advance_to(state, counters, acc, 0.5, rng, geom)
    # about 2 * 64 * 0.5 = 64 attempts
    assert counters.events > 0
    assert counters.collisions.sum() == 0
    assert counters.jumps.sum() == counters.events
    assert state.n_particles == 1


def test_incremental_drift_matches_recomputation(rng):
    geom = build_torus(1, 8)
    n = 4
    state = Configuration.from_sites(geom, [0, 1, 2, 5])
    counters = CounterField.zeros(geom)
    acc = DynkinAccumulators.register(_tracked(geom, n), state, counters, geom)
    for _ in range(500):
        step_event(state, counters, rng, geom, accumulators=acc)
    for idx, functional in enumerate(acc.functionals):
        assert acc.drift[idx] == pytest.approx(generator_moment(functional, state, 1), abs=1e-9)
        assert acc.square_field[idx] == pytest.approx(generator_moment(functional, state, 2), abs=1e-9)
        assert acc.values[idx] == pytest.approx(functional.value(state, counters), abs=1e-9)


def test_incremental_drift_in_two_dimensions(rng):
    geom = build_torus(2, 4)
    n = 6
    phi = TestFunction.table({(0, "+"): TestFunction.cos(axis=1), (1, "-"): TestFunction.constant(1.0)})
    functionals = [
        build_functional(ObservableKind.UNI_FLUX, phi, geom, n, "phi"),
        build_functional(ObservableKind.UNI_COLLISION, phi, geom, n, "phi"),
    ]
    state = Configuration.from_sites(geom, [0, 1, 4, 5, 10, 15])
    counters = CounterField.zeros(geom)
    acc = DynkinAccumulators.register(functionals, state, counters, geom)
    for _ in range(300):
        step_event(state, counters, rng, geom, accumulators=acc)
    for idx, functional in enumerate(functionals):
        assert acc.drift[idx] == pytest.approx(generator_moment(functional, state), abs=1e-9)


def test_advance_backwards_is_refused(line4, rng):
    state = Configuration.from_sites(line4, [0], t=1.0)
    with pytest.raises(UsageError):
        advance_to(state, CounterField.zeros(line4), DynkinAccumulators.empty(state, line4), 0.5, rng, line4)


def test_budget_exhaustion_reports_progress(line4, rng):
    state = Configuration.from_sites(line4, [0, 2])
    counters = CounterField.zeros(line4)
    with pytest.raises(BudgetError) as info:
        advance_to(state, counters, DynkinAccumulators.empty(state, line4), 10.0, rng, line4, budget=5)
    assert counters.events == 5
    assert info.value.diagnostics["t_target"] == 10.0
    assert info.value.diagnostics["t_reached"] < 10.0


def test_audit_passes_and_detects_tampering(rng):
    geom = build_torus(1, 8)
    state = Configuration.from_sites(geom, [0, 1, 2, 5])
    initial = state.copy()
    counters = CounterField.zeros(geom)
    acc = DynkinAccumulators.register(_tracked(geom, 4), state, counters, geom)
    advance_to(state, counters, acc, 0.2, rng, geom)
    assert audit_pathwise(initial, state, counters, geom, acc) == 5
    assert audit_pathwise(initial, state, counters, geom) == 4

    counters.jumps[0] += 1
    with pytest.raises(PathwiseIdentityError):
        audit_pathwise(initial, state, counters, geom)


def test_replica_streams_are_reproducible():
    a = replica_rng(7, 3).random(5)
    b = replica_rng(7, 3).random(5)
    c = replica_rng(7, 4).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_run_replica_is_deterministic(small_raw):
    cfg = validate_config(small_raw)
    first = run_replica(cfg, 2)
    second = run_replica(cfg, 2)
    assert first.samples == second.samples
    assert first.martingales == second.martingales
    assert first.events == second.events
    assert set(first.samples) == {0.005, 0.01}
    assert first.audits == 2 * 5


def test_run_replica_at_time_zero(small_raw):
    small_raw.update(T=0.0, sample_times=[0.0], martingales=[])
    cfg = validate_config(small_raw)
    result = run_replica(cfg, 0)
    assert result.events == 0
    assert result.samples[0.0]["uniflux:one_plus"] == 0.0
    assert result.samples[0.0]["netcol:one"] == 0.0
    assert result.samples[0.0]["empirical:one"] == pytest.approx(result.n_particles / cfg.n)


def test_event_trace_roundtrip(tmp_path, rng):
    geom = build_torus(1, 8)
    state = Configuration.from_sites(geom, [0, 1, 2, 5])
    counters = CounterField.zeros(geom)
    trace = EventTrace(capacity=10)
    advance_to(state, counters, DynkinAccumulators.empty(state, geom), 0.5, rng, geom, trace=trace)
    assert trace.length == 10
    path = tmp_path / "trace.bin"
    trace.write(path)
    assert path.stat().st_size == 10 * TRACE_DTYPE.itemsize == 130
    records = EventTrace.read(path)
    assert np.all(np.diff(records["time"]) > 0)
    assert set(records["kind"].tolist()) <= {0, 1}
    assert records["edge"].max() < geom.n_edges
