"""
Microscopic state of the exclusion process: the configuration and the
per-directed-edge counters.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError
from .torus import TorusGeometry


@dataclass
class Configuration:
    """
    Occupancy bit-field plus particle index structures.

    Attributes:
        occupancy: int8 array over sites, values in {0, 1}
        particles: site of each particle, for O(1) uniform selection
        slots: site -> particle slot, -1 on empty sites
        t: current time
    """

    occupancy: np.ndarray
    particles: np.ndarray
    slots: np.ndarray
    t: float = 0.0

    @classmethod
    def from_occupancy(cls, occupancy, t: float = 0.0) -> "Configuration":
        occ = np.ascontiguousarray(occupancy, dtype=np.int8)
        if occ.ndim != 1 or np.any((occ != 0) & (occ != 1)):
            raise UsageError("occupancy must be a flat 0/1 array")
        particles = np.flatnonzero(occ).astype(np.int64)
        slots = np.full(occ.shape[0], -1, dtype=np.int64)
        slots[particles] = np.arange(particles.shape[0], dtype=np.int64)
        return cls(occupancy=occ, particles=particles, slots=slots, t=float(t))

    @classmethod
    def from_sites(cls, geom: TorusGeometry, sites, t: float = 0.0) -> "Configuration":
        occ = np.zeros(geom.n_sites, dtype=np.int8)
        occ[np.asarray(list(sites), dtype=np.int64)] = 1
        return cls.from_occupancy(occ, t=t)

    @property
    def n_particles(self) -> int:
        return int(self.particles.shape[0])

    def copy(self) -> "Configuration":
        return Configuration(
            occupancy=self.occupancy.copy(),
            particles=self.particles.copy(),
            slots=self.slots.copy(),
            t=self.t,
        )

    def is_consistent(self) -> bool:
        """Particle array and site map are mutually inverse."""
        if int(self.occupancy.sum()) != self.n_particles:
            return False
        if np.any(self.slots[self.particles] != np.arange(self.n_particles)):
            return False
        return bool(np.all((self.slots >= 0) == (self.occupancy == 1)))


@dataclass
class CounterField:
    """Cumulative attempts, jumps and collisions per directed edge."""

    attempts: np.ndarray
    jumps: np.ndarray
    collisions: np.ndarray
    events: int = field(default=0)

    @classmethod
    def zeros(cls, geom: TorusGeometry) -> "CounterField":
        return cls(
            attempts=np.zeros(geom.n_edges, dtype=np.int64),
            jumps=np.zeros(geom.n_edges, dtype=np.int64),
            collisions=np.zeros(geom.n_edges, dtype=np.int64),
        )

    def copy(self) -> "CounterField":
        return CounterField(
            attempts=self.attempts.copy(),
            jumps=self.jumps.copy(),
            collisions=self.collisions.copy(),
            events=self.events,
        )
