"""
Closed-form hydrodynamic reference values.

The limit density solves the heat equation on the unit torus from a finite
trigonometric profile, so rho, rho^2, their gradients, their pairings with
trigonometric test functions and their time integrals are all finite mode
sums. Composite Simpson quadratures of the same quantities are kept as
independent cross-checks.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, List, Optional, Union

import numpy as np
from scipy.integrate import simpson

from ..errors import ConfigError, UsageError
from .fourier import ModeSeries
from .functions import SIGNS, FunctionKind, TestFunction
from .initcond import DensityProfile

logger = logging.getLogger(__name__)

SIMPSON_POINTS = 1024


@dataclass(frozen=True)
class LimitField:
    """
    Heat-equation solution from rho0 together with the regime parameter.

    Attributes:
        rho0: Initial density profile
        alpha: Occupancy fraction of the classic regime, 0 for sparse
    """

    rho0: DensityProfile
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.alpha > 0 and self.l1_norm <= 0:
            raise ConfigError("classic limits need a profile with positive mass")

    @property
    def d(self) -> int:
        return self.rho0.d

    @property
    def l1_norm(self) -> float:
        return self.rho0.l1_norm

    @cached_property
    def rho(self) -> ModeSeries:
        return self.rho0.series.heat()

    @cached_property
    def rho_squared(self) -> ModeSeries:
        return self.rho * self.rho

    @cached_property
    def uniflux_rate(self) -> ModeSeries:
        """rho - (alpha/||rho0||_1) rho^2."""
        if self.alpha == 0:
            return self.rho
        return self.rho + self.rho_squared.scale(-self.alpha / self.l1_norm)

    def gradient(self, axis: int) -> ModeSeries:
        return self.rho.derivative(axis)


def eval_rho(field: LimitField, x, t: float) -> Union[float, np.ndarray]:
    if t < 0:
        raise UsageError(f"negative time {t}")
    return field.rho.evaluate(x, t)


def limit_uniflux(field: LimitField, x, T: float) -> Union[float, np.ndarray]:
    """int_0^T (rho - (alpha/||rho0||_1) rho^2)(x, t) dt."""
    return field.uniflux_rate.time_integral(T).evaluate(x)


def limit_unicol(field: LimitField, x, T: float) -> Union[float, np.ndarray]:
    """int_0^T rho^2(x, t) dt."""
    return field.rho_squared.time_integral(T).evaluate(x)


def limit_netflux(field: LimitField, x, T: float, axis: Optional[int] = None):
    """-int_0^T d rho/d x_axis (x, t) dt; all axes as an array when axis is None."""
    if axis is not None:
        return -field.gradient(axis).time_integral(T).evaluate(x)
    return np.array(
        [-field.gradient(a).time_integral(T).evaluate(x) for a in range(field.d)]
    )


def _components(phi: TestFunction, d: int, signed: bool) -> Iterator[ModeSeries]:
    """Series of every component phi_l (or phi_{l,+/-}) of a test function."""
    if phi.kind == FunctionKind.TRIG:
        raise UsageError("component-indexed pairing needs a constant or a component table")
    for axis in range(d):
        for sign in SIGNS if signed else (None,):
            yield phi.component_for(axis, sign).series(d)


def pair_rho(field: LimitField, phi: TestFunction, t: float) -> float:
    """<phi, rho(t)>."""
    if phi.is_component_indexed:
        raise UsageError("the density pairs with scalar test functions")
    return (phi.series(field.d) * field.rho).mean(t)


def pair_rho_squared(field: LimitField, phi: TestFunction, t: float) -> float:
    """sum_l <phi_l, rho^2(t)>: the limit of the nearest-neighbour pairing."""
    return sum((c * field.rho_squared).mean(t) for c in _components(phi, field.d, False))


def pair_uniflux(field: LimitField, phi: TestFunction, T: float) -> float:
    """sum_{l,+/-} <phi_{l,+/-}, w(T)>."""
    rate = field.uniflux_rate
    return sum(
        (c * rate).time_integral(T).mean() for c in _components(phi, field.d, True)
    )


def pair_unicol(field: LimitField, phi: TestFunction, T: float) -> float:
    """sum_{l,+/-} <phi_{l,+/-}, c(T)>."""
    return sum(
        (c * field.rho_squared).time_integral(T).mean()
        for c in _components(phi, field.d, True)
    )


def pair_netflux(field: LimitField, phi: TestFunction, T: float) -> float:
    """sum_l <phi_l, w_bar_l(T)> with w_bar = -int grad rho."""
    total = 0.0
    for axis, c in enumerate(_components(phi, field.d, False)):
        total -= (c * field.gradient(axis)).time_integral(T).mean()
    return total


def netcol_variance_target(field: LimitField, phi: TestFunction, T: float) -> float:
    """2 sum_l int_0^T <phi_l^2, rho^2(t)> dt."""
    total = 0.0
    for c in _components(phi, field.d, False):
        total += (c * c * field.rho_squared).time_integral(T).mean()
    return 2.0 * total


def reference_value(field: LimitField, kind: str, phi: TestFunction, t: float) -> float:
    """Limit of the pairing of the given observable kind at time t."""
    if kind == "empirical":
        return pair_rho(field, phi, t)
    if kind == "uniflux":
        return pair_uniflux(field, phi, t)
    if kind == "unicol":
        return pair_unicol(field, phi, t)
    if kind == "netflux":
        return pair_netflux(field, phi, t)
    if kind == "netcol":
        return 0.0
    if kind == "nn":
        return pair_rho_squared(field, phi, t)
    raise UsageError(f"no limit for observable kind {kind!r}")


# ---------------------------------------------------------------------------
# Quadrature cross-checks
# ---------------------------------------------------------------------------


def simpson_time_integral(f: Callable[[float], float], T: float, n: int = SIMPSON_POINTS) -> float:
    """Composite Simpson on [0, T] with n intervals."""
    if T == 0:
        return 0.0
    ts = np.linspace(0.0, T, n + 1)
    return float(simpson(np.array([f(t) for t in ts]), x=ts))


def _torus_grid(d: int, n: int) -> np.ndarray:
    axis = np.linspace(0.0, 1.0, n + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def simpson_torus_mean(values: np.ndarray, d: int, n: int) -> float:
    """Iterated Simpson over [0,1]^d of values on the closed (n+1)^d grid."""
    axis = np.linspace(0.0, 1.0, n + 1)
    arr = values.reshape((n + 1,) * d)
    for _ in range(d):
        arr = simpson(arr, x=axis, axis=-1)
    return float(arr)


def quadrature_uniflux(field: LimitField, x, T: float, n: int = SIMPSON_POINTS) -> float:
    scale = field.alpha / field.l1_norm if field.alpha else 0.0

    def rate(t: float) -> float:
        r = field.rho.evaluate(x, t)
        return r - scale * r * r

    return simpson_time_integral(rate, T, n)


def quadrature_unicol(field: LimitField, x, T: float, n: int = SIMPSON_POINTS) -> float:
    return simpson_time_integral(lambda t: field.rho.evaluate(x, t) ** 2, T, n)


def quadrature_variance_target(
    field: LimitField,
    phi: TestFunction,
    T: float,
    n_time: int = SIMPSON_POINTS,
    n_space: Optional[int] = None,
) -> float:
    """Space-time Simpson version of netcol_variance_target."""
    d = field.d
    n_space = n_space or (SIMPSON_POINTS if d == 1 else 64)
    pts = _torus_grid(d, n_space)
    weights: List[np.ndarray] = []
    for axis in range(d):
        comp = phi.component_for(axis, None)
        vals = np.broadcast_to(np.asarray(comp.evaluate(pts), dtype=float), (pts.shape[0],))
        weights.append(vals**2)
    phi_sq = np.sum(weights, axis=0)

    def inner(t: float) -> float:
        rho = field.rho.evaluate(pts, t)
        return simpson_torus_mean(phi_sq * rho * rho, d, n_space)

    return 2.0 * simpson_time_integral(inner, T, n_time)
