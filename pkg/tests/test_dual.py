import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from sepflux.core.dual import (
    StirringState,
    estimate_kpoint,
    exact_kpoint,
    stirring_generator,
    stirring_step,
    transition_distribution,
)
from sepflux.core.initcond import DensityProfile, bernoulli_field
from sepflux.core.torus import build_torus
from sepflux.errors import DuplicatePoints, StateSpaceTooLarge

from .conftest import cos_profile

HALF = DensityProfile.constant(0.5)


def test_move_onto_partner_swaps_labels(line4, rng):
    state = StirringState(np.array([0, 1], dtype=np.int64))
    after = stirring_step(state, line4, rng, choice=(0, 0))
    assert after.positions.tolist() == [1, 0]
    assert after.t > state.t
    moved = stirring_step(after, line4, rng, choice=(1, 1))
    assert moved.positions.tolist() == [1, 3]


@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_stirring_keeps_labels_distinct(seed, k):
    geom = build_torus(2, 3)
    rng = np.random.default_rng(seed)
    state = StirringState(rng.choice(geom.n_sites, size=k, replace=False).astype(np.int64))
    for _ in range(50):
        state = stirring_step(state, geom, rng)
        assert state.is_distinct()


def test_constant_profile_gives_constant_correlations(line4, rng):
    estimate = estimate_kpoint([1], 0.1, HALF, 2, line4, replicas=200, rng=rng)
    assert estimate.estimate == 0.25
    assert estimate.stderr == 0.0
    assert exact_kpoint([1], 0.1, HALF, 2, line4) == pytest.approx(0.25, abs=1e-12)
    assert exact_kpoint([0, 3], 0.1, HALF, 2, line4) == pytest.approx(0.0625, abs=1e-12)


def test_time_zero_is_the_initial_product(line4, rng):
    rho0 = cos_profile()
    direct = exact_kpoint([0, 2], 0.0, rho0, 4, line4)
    assert estimate_kpoint([0, 2], 0.0, rho0, 4, line4, replicas=10, rng=rng).estimate == direct
    # field(0) = 0.5 + 0.25 sinc(1/4), field(2) = 0.5 - 0.25 sinc(1/4)
    s = np.sinc(0.25)
    assert direct == pytest.approx((0.5 + 0.25 * s) * (0.5 - 0.25 * s))


def test_single_point_follows_discrete_heat_equation():
    geom = build_torus(1, 8)
    rho0 = cos_profile()
    t = 0.01
    rate = 2 * 64 * (1 - np.cos(np.pi / 4))
    expected = 0.5 + 0.25 * np.sinc(0.125) * np.exp(-rate * t)
    assert exact_kpoint([0], t, rho0, 8, geom) == pytest.approx(expected, abs=1e-9)


def test_two_point_function_is_symmetric():
    geom = build_torus(1, 8)
    rho0 = cos_profile()
    assert exact_kpoint([0, 3], 0.02, rho0, 8, geom) == pytest.approx(
        exact_kpoint([3, 0], 0.02, rho0, 8, geom), abs=1e-12
    )


def test_transition_distribution_is_a_law():
    geom = build_torus(1, 6)
    gen = stirring_generator(geom, 2)
    assert gen.size == 30
    dist = transition_distribution(gen, (0, 1), 0.05)
    assert dist.sum() == pytest.approx(1.0, abs=1e-10)
    assert dist.min() >= -1e-15


def test_three_points_are_out_of_exact_range(line4):
    with pytest.raises(StateSpaceTooLarge) as info:
        exact_kpoint([0, 1, 2], 0.1, HALF, 2, line4)
    assert info.value.states == 24
    assert "k <= 2" in str(info.value)


def test_state_space_limit():
    with pytest.raises(StateSpaceTooLarge) as info:
        stirring_generator(build_torus(1, 16), 2, limit=100)
    assert info.value.states == 240
    assert info.value.limit == 100


def test_duplicate_points_are_rejected(line4, rng):
    with pytest.raises(DuplicatePoints):
        exact_kpoint([1, 1], 0.1, HALF, 2, line4)
    with pytest.raises(DuplicatePoints):
        estimate_kpoint([2, 2], 0.1, HALF, 2, line4, replicas=10, rng=rng)


def test_monte_carlo_agrees_with_exact(rng):
    geom = build_torus(1, 8)
    rho0 = cos_profile()
    exact = exact_kpoint([0, 2], 0.01, rho0, 8, geom)
    estimate = estimate_kpoint([0, 2], 0.01, rho0, 8, geom, replicas=20_000, rng=rng, threads=2)
    assert estimate.stderr > 0
    assert abs(estimate.estimate - exact) < 5 * estimate.stderr


def _exclusion_generator(geom):
    """Dense generator of two exclusion particles on unordered site pairs."""
    pairs = list(itertools.combinations(range(geom.n_sites), 2))
    index = {p: i for i, p in enumerate(pairs)}
    rate = float(geom.L**2)
    q = np.zeros((len(pairs), len(pairs)))
    for src, pair in enumerate(pairs):
        for i in range(2):
            for direction in range(geom.n_directions):
                target = int(geom.neighbours[pair[i], direction])
                if target in pair:
                    continue
                moved = tuple(sorted((target, pair[1 - i])))
                q[src, index[moved]] += rate
                q[src, src] -= rate
    return pairs, index, q


def test_stirring_dual_matches_two_particle_exclusion():
    geom = build_torus(1, 6)
    rho0 = cos_profile()
    pairs, index, q = _exclusion_generator(geom)
    gen = stirring_generator(geom, 2)
    field = bernoulli_field(rho0, 6, geom)
    for t in (0.003, 0.02, 0.1):
        direct = expm(q * t)[index[(0, 2)]]
        dual = transition_distribution(gen, (0, 2), t)
        folded = np.zeros(len(pairs))
        for state, mass in zip(gen.states, dual):
            folded[index[tuple(sorted(state))]] += mass
        np.testing.assert_allclose(folded, direct, atol=1e-10)
        expected = sum(direct[j] * field[a] * field[b] for j, (a, b) in enumerate(pairs))
        assert exact_kpoint([0, 2], t, rho0, 6, geom) == pytest.approx(expected, abs=1e-10)
