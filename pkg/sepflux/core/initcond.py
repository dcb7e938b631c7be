"""
Slowly varying Bernoulli product initial law.

Every site x is occupied independently with probability n * int_{B(x)} rho0,
B(x) the axis-aligned box of side eps centred at x. The cell integral is
exact per Fourier mode:

    int_{B(x)} exp(2 pi i k.y) dy = eps^d exp(2 pi i k.x) prod_a sinc(k_a eps)
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Tuple

import numpy as np

from ..errors import ConfigError, ParameterExceedsOne
from .fourier import ModeSeries
from .functions import TrigTerm
from .state import Configuration
from .torus import TorusGeometry

logger = logging.getLogger(__name__)

# rounding slack for the boundary-feasible case parameter == 1
FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class DensityProfile:
    """rho0(x) = a0 + sum_j a_j * trig monomial_j(x)."""

    a0: float
    terms: Tuple[TrigTerm, ...] = ()
    d: int = 1

    def __post_init__(self) -> None:
        if self.a0 < sum(abs(t.amp) for t in self.terms) or self.a0 < 0:
            raise ConfigError(
                "density profile is not certified nonnegative: a0 must be >= sum |a_j|"
            )
        if any(t.max_axis() >= self.d for t in self.terms):
            raise ConfigError(f"profile uses an axis outside dimension {self.d}")

    @classmethod
    def constant(cls, c: float, d: int = 1) -> "DensityProfile":
        return cls(a0=float(c), d=d)

    @cached_property
    def series(self) -> ModeSeries:
        out = ModeSeries.constant(self.d, self.a0)
        for term in self.terms:
            out = out + term.series(self.d)
        return out

    @property
    def l1_norm(self) -> float:
        return self.series.mean()

    @property
    def sup_bound(self) -> float:
        return self.a0 + sum(abs(t.amp) for t in self.terms)

    def evaluate(self, points) -> np.ndarray:
        return self.series.evaluate(points)

    def to_dict(self) -> dict:
        return {"a0": self.a0, "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], d: int = 1) -> "DensityProfile":
        if "a0" not in raw:
            raise ConfigError("density profile requires 'a0'")
        terms = tuple(TrigTerm.from_dict(t) for t in raw.get("terms", []))
        return cls(a0=float(raw["a0"]), terms=terms, d=d)


def bernoulli_field(rho0: DensityProfile, n: int, geom: TorusGeometry) -> np.ndarray:
    """Bernoulli parameter of every site; raises on the first infeasible site."""
    pts = geom.positions
    out = np.zeros(geom.n_sites, dtype=complex)
    for (mode, _), coeff in rho0.series.terms.items():
        k = np.asarray(mode, dtype=float)
        damping = float(np.prod(np.sinc(k / geom.L)))
        out += coeff * damping * np.exp(2j * np.pi * (pts @ k))
    field = n * geom.cell_volume * out.real
    worst = int(np.argmax(field))
    if field[worst] > 1.0 + FEASIBILITY_SLACK:
        raise ParameterExceedsOne(worst, float(field[worst]))
    return np.clip(field, 0.0, 1.0)


def bernoulli_parameter(rho0: DensityProfile, n: int, geom: TorusGeometry, x: int) -> float:
    """
    Occupation probability n * int_{B(x)} rho0 of a single site.

    Raises:
        ParameterExceedsOne: the value exceeds one
    """
    pt = geom.positions[x]
    value = 0.0
    for (mode, _), coeff in rho0.series.terms.items():
        k = np.asarray(mode, dtype=float)
        damping = float(np.prod(np.sinc(k / geom.L)))
        value += (coeff * damping * np.exp(2j * np.pi * float(pt @ k))).real
    value *= n * geom.cell_volume
    if value > 1.0 + FEASIBILITY_SLACK:
        raise ParameterExceedsOne(x, value)
    return float(min(max(value, 0.0), 1.0))


def sample_initial(
    rho0: DensityProfile,
    n: int,
    geom: TorusGeometry,
    rng: np.random.Generator,
) -> Configuration:
    """Independent Bernoulli draw per site at time zero."""
    p = bernoulli_field(rho0, n, geom)
    occupancy = (rng.random(geom.n_sites) < p).astype(np.int8)
    state = Configuration.from_occupancy(occupancy)
    logger.debug("sampled %d particles (expected %.2f)", state.n_particles, p.sum())
    return state
