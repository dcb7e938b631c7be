"""
Scaling regimes linking the particle scale n to the lattice size L.

Classic: eps^d n = alpha / ||rho0||_1 with alpha in (0, 1).
Sparse:  n = ceil(L^(gamma d)) with gamma in (1/2, 1), so that
         eps^(-d/2) << n << eps^(-d) along the family.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Mapping, Union

from ..errors import ConfigError, InfeasibleRegime, ParameterExceedsOne, RangeError
from .initcond import DensityProfile, bernoulli_field
from .torus import build_torus

logger = logging.getLogger(__name__)

# L^(gamma d) within this of an integer is taken as that integer
_ROUNDING_SLACK = 1e-9


@dataclass(frozen=True)
class ClassicRegime:
    alpha: float

    type = "classic"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise RangeError(f"classic alpha must lie in (0, 1), got {self.alpha}")

    @property
    def limit_alpha(self) -> float:
        return self.alpha

    def particle_scale(self, L: int, d: int, rho0: DensityProfile) -> int:
        mass = rho0.l1_norm
        if mass <= 0:
            raise InfeasibleRegime("classic regime needs a profile with positive mass")
        return int(round(self.alpha * L**d / mass))

    def to_dict(self) -> dict:
        return {"type": self.type, "alpha": self.alpha}


@dataclass(frozen=True)
class SparseRegime:
    gamma: float

    type = "sparse"

    def __post_init__(self) -> None:
        if not 0.5 < self.gamma < 1.0:
            raise RangeError(f"sparse gamma must lie in (1/2, 1), got {self.gamma}")

    @property
    def limit_alpha(self) -> float:
        return 0.0

    def particle_scale(self, L: int, d: int, rho0: DensityProfile) -> int:
        raw = float(L) ** (self.gamma * d)
        nearest = round(raw)
        if abs(raw - nearest) < _ROUNDING_SLACK * max(1.0, raw):
            return int(nearest)
        return int(math.ceil(raw))

    def to_dict(self) -> dict:
        return {"type": self.type, "gamma": self.gamma}


ScalingRegime = Union[ClassicRegime, SparseRegime]


def regime_from_dict(raw: Mapping[str, Any]) -> ScalingRegime:
    kind = raw.get("type")
    if kind == "classic":
        if "alpha" not in raw:
            raise ConfigError("classic regime requires 'alpha'")
        return ClassicRegime(alpha=float(raw["alpha"]))
    if kind == "sparse":
        if "gamma" not in raw:
            raise ConfigError("sparse regime requires 'gamma'")
        return SparseRegime(gamma=float(raw["gamma"]))
    raise ConfigError(f"unknown regime type {kind!r}")


def resolve_regime(regime: ScalingRegime, L: int, d: int, rho0: DensityProfile) -> int:
    """
    Particle scale n for lattice size L, checked for feasibility.

    Raises:
        InfeasibleRegime: some site's Bernoulli parameter exceeds one, or n < 1
        RangeError: regime parameter out of range
    """
    n = regime.particle_scale(L, d, rho0)
    if n < 1:
        raise InfeasibleRegime(f"{regime.type} regime gives n={n} at L={L}")
    try:
        bernoulli_field(rho0, n, build_torus(d, L))
    except ParameterExceedsOne as exc:
        raise InfeasibleRegime(
            f"{regime.type} regime at L={L}, n={n}: Bernoulli parameter {exc.value:.4g} "
            f"> 1 at site {exc.site}"
        ) from exc
    logger.debug("resolved %s regime at L=%d to n=%d", regime.type, L, n)
    return n


def below_fluctuation_scale(n: int, L: int, d: int) -> bool:
    """eps^(d/2) n < 1: no limit target for collision fluctuations."""
    return n < L ** (d / 2.0)
