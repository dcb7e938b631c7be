"""
Macroscopic observables: rescaled pairings of the configuration and of the
edge counters against test functions.

Each linear observable is also described by its increment tables: the change
of its value when a jump, resp. a collision, happens on a directed edge. The
generator and every k-field act on such functionals as

    (Q F)(Z)   = eps^-2 * sum_e eta(x)(1-eta(y)) dJ_e + eta(x)eta(y) dC_e
    (G_k F)(Z) = eps^-2 * sum_e eta(x)(1-eta(y)) dJ_e^k + eta(x)eta(y) dC_e^k

with e = (x -> y); generator_moment evaluates this directly and serves as the
reference for the closed forms below.

Convention for the nearest-neighbour measure inside (l, +/-)-indexed
expressions: every occupied unordered pair feeds both signs of its axis.
With it, drift_uniflux = <phi, rho> - eps^d n <phi, Lambda> holds exactly on
every configuration.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import UsageError
from .functions import FunctionKind, TestFunction
from .state import Configuration, CounterField
from .torus import TorusGeometry, direction_of


class ObservableKind(str, Enum):
    EMPIRICAL = "empirical"
    UNI_FLUX = "uniflux"
    UNI_COLLISION = "unicol"
    NET_FLUX = "netflux"
    NET_COLLISION = "netcol"
    NEAREST_NEIGHBOUR = "nn"

    @property
    def is_signed(self) -> bool:
        """Indexed by (l, +/-) rather than by l."""
        return self in (ObservableKind.UNI_FLUX, ObservableKind.UNI_COLLISION)

    @property
    def is_scalar(self) -> bool:
        return self == ObservableKind.EMPIRICAL


def prefactor(kind: ObservableKind, geom: TorusGeometry, n: int) -> float:
    """Single source of truth for the rescaling of every observable."""
    eps = 1.0 / geom.L
    vol = geom.cell_volume
    if kind == ObservableKind.EMPIRICAL:
        return 1.0 / n
    if kind == ObservableKind.UNI_FLUX:
        return eps**2 / n
    if kind == ObservableKind.UNI_COLLISION:
        return eps**2 / (vol * n**2)
    if kind == ObservableKind.NET_FLUX:
        return eps / n
    if kind == ObservableKind.NET_COLLISION:
        return eps / (np.sqrt(vol) * n)
    return 1.0 / (vol * n**2)


def _check_shape(phi: TestFunction, signed: bool) -> None:
    if phi.kind == FunctionKind.TRIG:
        raise UsageError("component-indexed observable needs a constant or a component table")
    if phi.kind == FunctionKind.TABLE and phi.components and phi.is_signed != signed:
        expected = "(axis, sign)" if signed else "axis"
        raise UsageError(f"test function table must be indexed by {expected}")


def edge_values(phi: TestFunction, geom: TorusGeometry, signed: bool) -> np.ndarray:
    """phi_{l,+/-} (signed) or phi_l (unsigned) at every directed edge midpoint."""
    _check_shape(phi, signed)
    nd = geom.n_directions
    out = np.empty(geom.n_edges, dtype=float)
    for k in range(nd):
        axis, sign = direction_of(k)
        comp = phi.component_for(axis, sign if signed else None)
        out[k::nd] = comp.evaluate(geom.edge_midpoints[k::nd])
    return out


def _orientation(geom: TorusGeometry) -> np.ndarray:
    return np.where(geom.edge_directions % 2 == 0, 1.0, -1.0)


def _particle_edges(state: Configuration, geom: TorusGeometry):
    """Outgoing edge indices and target occupancy of every particle, (N, 2d)."""
    nd = geom.n_directions
    edges = state.particles[:, None] * nd + np.arange(nd, dtype=np.int64)[None, :]
    targets = geom.neighbours[state.particles]
    return edges, state.occupancy[targets].astype(float)


def _nn_sum(values: np.ndarray, state: Configuration, geom: TorusGeometry) -> float:
    """sum over occupied pairs x ~> x+eps 1_l of values[(x, l, +)]."""
    total = 0.0
    for axis in range(geom.d):
        k = 2 * axis
        targets = geom.neighbours[state.particles, k]
        paired = state.particles[state.occupancy[targets] == 1]
        total += float(values[paired * geom.n_directions + k].sum())
    return total


def pair_empirical(phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry) -> float:
    """(1/n) sum_x eta(x) phi(x)."""
    if phi.is_component_indexed:
        raise UsageError("empirical measure pairs with scalar test functions")
    if state.occupancy.shape[0] != geom.n_sites:
        raise UsageError(f"configuration has {state.occupancy.shape[0]} sites, lattice has {geom.n_sites}")
    if state.n_particles == 0:
        return 0.0
    return float(np.sum(phi.evaluate(geom.positions[state.particles]))) / n


def pair_counters(
    kind: ObservableKind,
    phi: TestFunction,
    counters: CounterField,
    n: int,
    geom: TorusGeometry,
) -> float:
    """
    Pairing of a flux or collision observable with phi.

    Unidirectional kinds sum over directed edges; net kinds take the signed
    difference over each unordered edge, both weighted by phi at the edge
    midpoint and by the kind's prefactor.
    """
    if kind in (ObservableKind.EMPIRICAL, ObservableKind.NEAREST_NEIGHBOUR):
        raise UsageError(f"{kind.value} is not a counter observable")
    functional = build_functional(kind, phi, geom, n)
    return functional.counter_value(counters)


def pair_nn_measure(
    phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry
) -> float:
    """(1/(eps^d n^2)) sum_{x ~>_l y} eta(x) eta(y) phi_l((x+y)/2)."""
    values = edge_values(phi, geom, signed=False)
    return prefactor(ObservableKind.NEAREST_NEIGHBOUR, geom, n) * _nn_sum(values, state, geom)


def _nn_signed(values: np.ndarray, state: Configuration, geom: TorusGeometry) -> float:
    """Pair sum where each unordered pair feeds both signs of its axis."""
    if state.n_particles == 0:
        return 0.0
    edges, occupied = _particle_edges(state, geom)
    return float(np.sum(occupied * values[edges]))


def drift_uniflux(phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry) -> float:
    """(1/n) sum_{l,+/-,x} eta(x)(1 - eta(x +/- eps 1_l)) phi_{l,+/-}(midpoint)."""
    values = edge_values(phi, geom, signed=True)
    if state.n_particles == 0:
        return 0.0
    edges, occupied = _particle_edges(state, geom)
    return float(np.sum((1.0 - occupied) * values[edges])) / n


def drift_unicol(phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry) -> float:
    """<phi, Lambda> in the (l, +/-) convention: both signs of every pair."""
    values = edge_values(phi, geom, signed=True)
    pref = prefactor(ObservableKind.NEAREST_NEIGHBOUR, geom, n)
    return pref * _nn_signed(values, state, geom)


def gamma2_uniflux(phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry) -> float:
    values = edge_values(phi, geom, signed=True)
    if state.n_particles == 0:
        return 0.0
    edges, occupied = _particle_edges(state, geom)
    eps2 = 1.0 / geom.L**2
    return eps2 / n**2 * float(np.sum((1.0 - occupied) * values[edges] ** 2))


def gamma2_unicol(phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry) -> float:
    values = edge_values(phi, geom, signed=True)
    pref = prefactor(ObservableKind.UNI_COLLISION, geom, n)
    lam = prefactor(ObservableKind.NEAREST_NEIGHBOUR, geom, n)
    # eps^2/(eps^d n^2) <phi^2, Lambda>
    return pref * lam * _nn_signed(values**2, state, geom)


def gamma_k_netcol(
    phi: TestFunction, state: Configuration, n: int, geom: TorusGeometry, k: int
) -> float:
    """k-field of the net collision pairing: 2<phi^2,Lambda>, 0, 2eps^2/(eps^d n^2)<phi^4,Lambda>."""
    if k not in (2, 3, 4):
        raise UsageError(f"k must be 2, 3 or 4, got {k}")
    values = edge_values(phi, geom, signed=False)
    if k == 3:
        return 0.0
    lam = prefactor(ObservableKind.NEAREST_NEIGHBOUR, geom, n) * _nn_sum(values**k, state, geom)
    if k == 2:
        return 2.0 * lam
    eps2 = 1.0 / geom.L**2
    return 2.0 * eps2 / (geom.cell_volume * n**2) * lam


@dataclass
class Functional:
    """
    A linear macroscopic functional through its per-edge increments.

    Attributes:
        kind: Observable kind
        phi_id: Registry id of the test function
        jump_increments: value change for a jump on each directed edge
        collision_increments: value change for a collision on each directed edge
    """

    kind: ObservableKind
    phi: TestFunction
    phi_id: str
    n: int
    geom: TorusGeometry
    jump_increments: np.ndarray
    collision_increments: np.ndarray

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.phi_id}"

    def counter_value(self, counters: CounterField) -> float:
        return float(
            np.dot(counters.jumps.astype(float), self.jump_increments)
            + np.dot(counters.collisions.astype(float), self.collision_increments)
        )

    def value(self, state: Configuration, counters: CounterField) -> float:
        if self.kind == ObservableKind.EMPIRICAL:
            return pair_empirical(self.phi, state, self.n, self.geom)
        return self.counter_value(counters)


def build_functional(
    kind: ObservableKind,
    phi: TestFunction,
    geom: TorusGeometry,
    n: int,
    phi_id: Optional[str] = None,
) -> Functional:
    pref = prefactor(kind, geom, n)
    zeros = np.zeros(geom.n_edges, dtype=float)
    if kind == ObservableKind.EMPIRICAL:
        if phi.is_component_indexed:
            raise UsageError("empirical measure pairs with scalar test functions")
        at_sites = np.asarray(phi.evaluate(geom.positions), dtype=float)
        if at_sites.ndim == 0:
            at_sites = np.full(geom.n_sites, float(at_sites))
        jumps = pref * (at_sites[geom.edge_targets] - at_sites[geom.edge_sources])
        collisions = zeros
    elif kind == ObservableKind.UNI_FLUX:
        jumps, collisions = pref * edge_values(phi, geom, signed=True), zeros
    elif kind == ObservableKind.UNI_COLLISION:
        jumps, collisions = zeros, pref * edge_values(phi, geom, signed=True)
    elif kind == ObservableKind.NET_FLUX:
        jumps = pref * _orientation(geom) * edge_values(phi, geom, signed=False)
        collisions = zeros
    elif kind == ObservableKind.NET_COLLISION:
        jumps = zeros
        collisions = pref * _orientation(geom) * edge_values(phi, geom, signed=False)
    else:
        raise UsageError("the nearest-neighbour measure is not a cumulative functional")
    return Functional(
        kind=kind,
        phi=phi,
        phi_id=phi_id or kind.value,
        n=n,
        geom=geom,
        jump_increments=np.ascontiguousarray(jumps),
        collision_increments=np.ascontiguousarray(collisions),
    )


def generator_moment(functional: Functional, state: Configuration, k: int = 1) -> float:
    """sum over transitions of rate * (increment)^k; k=1 is Q F, k>=2 the k-field."""
    if state.n_particles == 0:
        return 0.0
    geom = functional.geom
    edges, occupied = _particle_edges(state, geom)
    dj = functional.jump_increments[edges] ** k
    dc = functional.collision_increments[edges] ** k
    return float(geom.L**2 * np.sum((1.0 - occupied) * dj + occupied * dc))


def check_pairing_shape(kind: ObservableKind, phi: TestFunction) -> None:
    """Raise UsageError unless phi has the index structure the kind pairs with."""
    if kind == ObservableKind.EMPIRICAL:
        if phi.is_component_indexed:
            raise UsageError("empirical measure pairs with scalar test functions")
        return
    _check_shape(phi, kind.is_signed)


def closed_form_moment(functional: Functional, state: Configuration, k: int) -> float:
    """
    Drift (k=1) or square field (k=2) of a functional from the closed forms
    where one exists, generator_moment otherwise.
    """
    phi, n, geom = functional.phi, functional.n, functional.geom
    if functional.kind == ObservableKind.UNI_FLUX:
        return drift_uniflux(phi, state, n, geom) if k == 1 else gamma2_uniflux(phi, state, n, geom)
    if functional.kind == ObservableKind.UNI_COLLISION:
        return drift_unicol(phi, state, n, geom) if k == 1 else gamma2_unicol(phi, state, n, geom)
    if functional.kind == ObservableKind.NET_COLLISION and k >= 2:
        return gamma_k_netcol(phi, state, n, geom, k)
    return generator_moment(functional, state, k)
