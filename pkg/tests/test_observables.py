import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepflux.core.functions import TestFunction
from sepflux.core.observables import (
    ObservableKind,
    build_functional,
    check_pairing_shape,
    closed_form_moment,
    drift_unicol,
    drift_uniflux,
    edge_values,
    gamma2_unicol,
    gamma2_uniflux,
    gamma_k_netcol,
    generator_moment,
    pair_counters,
    pair_empirical,
    pair_nn_measure,
    prefactor,
)
from sepflux.core.state import Configuration, CounterField
from sepflux.core.torus import build_torus
from sepflux.errors import UsageError

ONE = TestFunction.constant(1.0)

SIGNED = TestFunction.table(
    {
        (0, "+"): TestFunction.cos(),
        (0, "-"): TestFunction.sin(amp=0.5),
        (1, "+"): TestFunction.constant(1.0),
        (1, "-"): TestFunction.cos(axis=1, freq=2),
    }
)
BY_AXIS = TestFunction.table({(0, None): TestFunction.cos(), (1, None): TestFunction.sin(axis=0)})


def test_prefactors(line4):
    n = 2
    assert prefactor(ObservableKind.EMPIRICAL, line4, n) == 0.5
    assert prefactor(ObservableKind.UNI_FLUX, line4, n) == pytest.approx(1 / 32)
    assert prefactor(ObservableKind.UNI_COLLISION, line4, n) == pytest.approx(1 / 16)
    assert prefactor(ObservableKind.NET_FLUX, line4, n) == pytest.approx(1 / 8)
    assert prefactor(ObservableKind.NET_COLLISION, line4, n) == pytest.approx(1 / 4)
    assert prefactor(ObservableKind.NEAREST_NEIGHBOUR, line4, n) == pytest.approx(1.0)


def test_pair_empirical(line4):
    state = Configuration.from_sites(line4, [0, 2])
    assert pair_empirical(ONE, state, 2, line4) == 1.0
    assert pair_empirical(TestFunction.cos(), state, 2, line4) == pytest.approx(0.0, abs=1e-12)
    assert pair_empirical(ONE, Configuration.from_sites(line4, []), 2, line4) == 0.0
    with pytest.raises(UsageError):
        pair_empirical(ONE, state, 2, build_torus(2, 4))


def test_uniflux_pairing(line4):
    counters = CounterField.zeros(line4)
    counters.jumps[0] = 1
    assert pair_counters(ObservableKind.UNI_FLUX, ONE, counters, 2, line4) == pytest.approx(0.03125)


def test_netflux_pairing_is_signed(line4):
    counters = CounterField.zeros(line4)
    # edge 0 is 0 -> 1, edge 3 is 1 -> 0
    counters.jumps[0] = 3
    counters.jumps[3] = 1
    assert pair_counters(ObservableKind.NET_FLUX, ONE, counters, 2, line4) == pytest.approx(0.25)


def test_collision_pairings(line4):
    counters = CounterField.zeros(line4)
    counters.collisions[0] = 2
    counters.collisions[3] = 1
    assert pair_counters(ObservableKind.NET_COLLISION, ONE, counters, 2, line4) == pytest.approx(0.25)
    counters.collisions[3] = 0
    assert pair_counters(ObservableKind.UNI_COLLISION, ONE, counters, 2, line4) == pytest.approx(0.125)


def test_pair_counters_refuses_state_observables(line4):
    with pytest.raises(UsageError):
        pair_counters(ObservableKind.NEAREST_NEIGHBOUR, ONE, CounterField.zeros(line4), 2, line4)


def test_nearest_neighbour_measure(line4):
    assert pair_nn_measure(ONE, Configuration.from_sites(line4, [0, 1]), 2, line4) == pytest.approx(1.0)
    full = Configuration.from_sites(line4, range(4))
    assert pair_nn_measure(ONE, full, 4, line4) == pytest.approx(1.0)
    assert pair_nn_measure(ONE, Configuration.from_sites(line4, [0, 2]), 2, line4) == 0.0


def test_drift_uniflux_examples(line4, one_plus):
    assert drift_uniflux(one_plus, Configuration.from_sites(line4, [0, 1]), 2, line4) == pytest.approx(0.5)
    assert drift_uniflux(ONE, Configuration.from_sites(line4, [2]), 3, line4) == pytest.approx(2 / 3)
    assert drift_uniflux(ONE, Configuration.from_sites(line4, range(4)), 4, line4) == 0.0


def test_drift_unicol_counts_both_signs_of_a_pair(line4, one_plus):
    pair = Configuration.from_sites(line4, [0, 1])
    assert drift_unicol(one_plus, pair, 2, line4) == pytest.approx(1.0)
    assert drift_unicol(ONE, pair, 2, line4) == pytest.approx(2.0)
    functional = build_functional(ObservableKind.UNI_COLLISION, one_plus, line4, 2)
    assert generator_moment(functional, pair) == pytest.approx(1.0)


def test_gamma_k_netcol_examples(line4):
    pair = Configuration.from_sites(line4, [0, 1])
    assert gamma_k_netcol(ONE, pair, 2, line4, 2) == pytest.approx(2.0)
    assert gamma_k_netcol(ONE, pair, 2, line4, 3) == 0.0
    assert gamma_k_netcol(ONE, pair, 2, line4, 4) == pytest.approx(0.125)
    with pytest.raises(UsageError):
        gamma_k_netcol(ONE, pair, 2, line4, 5)


def test_empty_configuration_has_no_drift(line4):
    empty = Configuration.from_sites(line4, [])
    assert drift_uniflux(ONE, empty, 1, line4) == 0.0
    assert drift_unicol(ONE, empty, 1, line4) == 0.0
    assert gamma_k_netcol(ONE, empty, 1, line4, 2) == 0.0


def test_pairing_shapes():
    check_pairing_shape(ObservableKind.UNI_FLUX, SIGNED)
    check_pairing_shape(ObservableKind.NET_COLLISION, BY_AXIS)
    check_pairing_shape(ObservableKind.NET_FLUX, ONE)
    with pytest.raises(UsageError):
        check_pairing_shape(ObservableKind.UNI_FLUX, TestFunction.cos())
    with pytest.raises(UsageError):
        check_pairing_shape(ObservableKind.NET_FLUX, SIGNED)
    with pytest.raises(UsageError):
        check_pairing_shape(ObservableKind.UNI_COLLISION, BY_AXIS)
    with pytest.raises(UsageError):
        check_pairing_shape(ObservableKind.EMPIRICAL, BY_AXIS)


def test_nn_is_not_a_functional(line4):
    with pytest.raises(UsageError):
        build_functional(ObservableKind.NEAREST_NEIGHBOUR, ONE, line4, 2)


@st.composite
def occupancies(draw):
    bits = draw(st.lists(st.integers(0, 1), min_size=16, max_size=16))
    return np.asarray(bits, dtype=np.int8)


@given(occ=occupancies(), n=st.integers(1, 20))
@settings(max_examples=60, deadline=None)
def test_closed_forms_agree_with_generator(occ, n):
    geom = build_torus(2, 4)
    state = Configuration.from_occupancy(occ)

    uniflux = build_functional(ObservableKind.UNI_FLUX, SIGNED, geom, n)
    assert drift_uniflux(SIGNED, state, n, geom) == pytest.approx(generator_moment(uniflux, state), abs=1e-9)
    assert gamma2_uniflux(SIGNED, state, n, geom) == pytest.approx(
        generator_moment(uniflux, state, 2), abs=1e-9
    )

    unicol = build_functional(ObservableKind.UNI_COLLISION, SIGNED, geom, n)
    assert drift_unicol(SIGNED, state, n, geom) == pytest.approx(generator_moment(unicol, state), abs=1e-9)
    assert gamma2_unicol(SIGNED, state, n, geom) == pytest.approx(
        generator_moment(unicol, state, 2), abs=1e-9
    )

    netcol = build_functional(ObservableKind.NET_COLLISION, BY_AXIS, geom, n)
    for k in (2, 3, 4):
        assert gamma_k_netcol(BY_AXIS, state, n, geom, k) == pytest.approx(
            generator_moment(netcol, state, k), abs=1e-9
        )


@given(occ=occupancies(), n=st.integers(1, 20))
@settings(max_examples=40, deadline=None)
def test_uniflux_drift_splits_into_density_and_pairs(occ, n):
    geom = build_torus(2, 4)
    state = Configuration.from_occupancy(occ)
    # sum_{l,+/-} <phi_{l,+/-}, pi> - eps^d n <phi, Lambda>
    values = edge_values(SIGNED, geom, signed=True)
    edges = state.particles[:, None] * geom.n_directions + np.arange(geom.n_directions)
    density = float(values[edges].sum()) / n
    pairs = geom.cell_volume * n * drift_unicol(SIGNED, state, n, geom)
    assert drift_uniflux(SIGNED, state, n, geom) == pytest.approx(density - pairs, abs=1e-9)


SIGNED_B = TestFunction.table(
    {
        (0, "+"): TestFunction.sin(freq=2),
        (0, "-"): TestFunction.constant(-0.5),
        (1, "+"): TestFunction.cos(axis=1),
        (1, "-"): TestFunction.sin(axis=0, amp=2.0),
    }
)
BY_AXIS_B = TestFunction.table({(0, None): TestFunction.constant(0.3), (1, None): TestFunction.cos(axis=1)})
SCALAR = TestFunction.cos(axis=1, freq=2).plus(TestFunction.constant(0.1))
SCALAR_B = TestFunction.sin(amp=0.4)
# 1 + cos and 1 + sin/2 are nonnegative
NONNEGATIVE = TestFunction.cos().plus(TestFunction.constant(1.0))
NONNEGATIVE_TABLE = TestFunction.table(
    {(0, None): NONNEGATIVE, (1, None): TestFunction.sin(axis=1, amp=0.5).plus(TestFunction.constant(1.0))}
)


def _combine(f, g, a, b):
    if not f.is_component_indexed:
        return f.scale(a).plus(g.scale(b))
    other = dict(g.components)
    return TestFunction.table({key: phi.scale(a).plus(other[key].scale(b)) for key, phi in f.components})


def _signed_part(phi, sign):
    return TestFunction.table({(axis, sign): comp for (axis, _), comp in phi.components})


GEOM_2D = build_torus(2, 4)
edge_counts = st.lists(st.integers(0, 50), min_size=GEOM_2D.n_edges, max_size=GEOM_2D.n_edges)


def _counters(jumps, collisions):
    counters = CounterField.zeros(GEOM_2D)
    counters.jumps[:] = jumps
    counters.collisions[:] = collisions
    return counters


@given(jumps=edge_counts, n=st.integers(1, 20))
@settings(max_examples=40, deadline=None)
def test_netflux_is_difference_of_unidirectional_fluxes(jumps, n):
    counters = _counters(jumps, [0] * GEOM_2D.n_edges)
    forward = pair_counters(ObservableKind.UNI_FLUX, _signed_part(BY_AXIS, "+"), counters, n, GEOM_2D)
    backward = pair_counters(ObservableKind.UNI_FLUX, _signed_part(BY_AXIS, "-"), counters, n, GEOM_2D)
    net = pair_counters(ObservableKind.NET_FLUX, BY_AXIS, counters, n, GEOM_2D)
    assert net == pytest.approx(GEOM_2D.L * (forward - backward), abs=1e-9)


@given(
    jumps=edge_counts,
    collisions=edge_counts,
    occ=occupancies(),
    a=st.floats(-3, 3),
    b=st.floats(-3, 3),
)
@settings(max_examples=40, deadline=None)
def test_pairings_are_linear_in_the_test_function(jumps, collisions, occ, a, b):
    n = 7
    counters = _counters(jumps, collisions)
    state = Configuration.from_occupancy(occ)
    for kind, f, g in (
        (ObservableKind.UNI_FLUX, SIGNED, SIGNED_B),
        (ObservableKind.UNI_COLLISION, SIGNED, SIGNED_B),
        (ObservableKind.NET_FLUX, BY_AXIS, BY_AXIS_B),
        (ObservableKind.NET_COLLISION, BY_AXIS, BY_AXIS_B),
    ):
        combined = pair_counters(kind, _combine(f, g, a, b), counters, n, GEOM_2D)
        parts = a * pair_counters(kind, f, counters, n, GEOM_2D)
        parts += b * pair_counters(kind, g, counters, n, GEOM_2D)
        assert combined == pytest.approx(parts, abs=1e-9)

    combined = pair_empirical(_combine(SCALAR, SCALAR_B, a, b), state, n, GEOM_2D)
    parts = a * pair_empirical(SCALAR, state, n, GEOM_2D) + b * pair_empirical(SCALAR_B, state, n, GEOM_2D)
    assert combined == pytest.approx(parts, abs=1e-9)

    combined = pair_nn_measure(_combine(BY_AXIS, BY_AXIS_B, a, b), state, n, GEOM_2D)
    parts = a * pair_nn_measure(BY_AXIS, state, n, GEOM_2D)
    parts += b * pair_nn_measure(BY_AXIS_B, state, n, GEOM_2D)
    assert combined == pytest.approx(parts, abs=1e-9)


@given(jumps=edge_counts, collisions=edge_counts, occ=occupancies())
@settings(max_examples=30, deadline=None)
def test_pairings_with_nonnegative_functions_are_nonnegative(jumps, collisions, occ):
    counters = _counters(jumps, collisions)
    state = Configuration.from_occupancy(occ)
    signed = _signed_part(NONNEGATIVE_TABLE, "+")
    assert pair_empirical(NONNEGATIVE, state, 5, GEOM_2D) >= 0.0
    assert pair_counters(ObservableKind.UNI_FLUX, signed, counters, 5, GEOM_2D) >= 0.0
    assert pair_counters(ObservableKind.UNI_COLLISION, signed, counters, 5, GEOM_2D) >= 0.0
    assert pair_nn_measure(NONNEGATIVE_TABLE, state, 5, GEOM_2D) >= 0.0


@given(occ=occupancies(), n=st.integers(1, 20))
@settings(max_examples=40, deadline=None)
def test_closed_form_moments_match_generator(occ, n):
    state = Configuration.from_occupancy(occ)
    for kind, phi in (
        (ObservableKind.EMPIRICAL, SCALAR),
        (ObservableKind.UNI_FLUX, SIGNED),
        (ObservableKind.UNI_COLLISION, SIGNED_B),
        (ObservableKind.NET_FLUX, BY_AXIS),
        (ObservableKind.NET_COLLISION, BY_AXIS_B),
    ):
        functional = build_functional(kind, phi, GEOM_2D, n)
        for k in (1, 2):
            assert closed_form_moment(functional, state, k) == pytest.approx(
                generator_moment(functional, state, k), abs=1e-9
            )
