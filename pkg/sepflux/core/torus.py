"""
Geometry of the discrete torus with L sites per axis and spacing 1/L.

Sites are row-major integer codes. Directions are numbered k = 2*axis + s
with s = 0 for the positive and s = 1 for the negative sign, so the
directed edge (x, axis, sign) has index x * 2d + k. Edge midpoints are kept
in half-lattice integer units and only divided by 2L on output, so they are
exact to 0.5/L.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from ..errors import DegenerateLattice, LatticeOverflow, UsageError
from .functions import Sign, TestFunction

logger = logging.getLogger(__name__)

# edge indices are written as uint32 in event traces
MAX_EDGES = 2**32 - 1


def direction_index(axis: int, sign: str) -> int:
    return 2 * axis + (0 if sign == "+" else 1)


def direction_of(k: int) -> Tuple[int, str]:
    return k // 2, "+" if k % 2 == 0 else "-"


@dataclass(frozen=True)
class TorusGeometry:
    d: int
    L: int

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, self.L)

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def n_directions(self) -> int:
        return 2 * self.d

    @property
    def n_edges(self) -> int:
        return self.n_directions * self.n_sites

    @property
    def cell_volume(self) -> float:
        """eps^d."""
        return float(Fraction(1, self.n_sites))

    @cached_property
    def coords(self) -> np.ndarray:
        """Integer coordinates of every site, shape (S, d)."""
        grid = np.indices((self.L,) * self.d).reshape(self.d, -1).T
        return np.ascontiguousarray(grid, dtype=np.int64)

    @cached_property
    def positions(self) -> np.ndarray:
        return self.coords / self.L

    @cached_property
    def strides(self) -> np.ndarray:
        return self.L ** np.arange(self.d - 1, -1, -1, dtype=np.int64)

    @cached_property
    def neighbours(self) -> np.ndarray:
        """Neighbour table of shape (S, 2d), column k = 2*axis + s."""
        table = np.empty((self.n_sites, self.n_directions), dtype=np.int64)
        for axis in range(self.d):
            for s, step in enumerate((1, -1)):
                shifted = self.coords.copy()
                shifted[:, axis] = (shifted[:, axis] + step) % self.L
                table[:, 2 * axis + s] = shifted @ self.strides
        return table

    @cached_property
    def edge_sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_sites, dtype=np.int64), self.n_directions)

    @cached_property
    def edge_directions(self) -> np.ndarray:
        return np.tile(np.arange(self.n_directions, dtype=np.int64), self.n_sites)

    @cached_property
    def edge_targets(self) -> np.ndarray:
        return self.neighbours.reshape(-1)

    @cached_property
    def edge_reverse(self) -> np.ndarray:
        """Index of the reverse of every directed edge."""
        return self.edge_targets * self.n_directions + (self.edge_directions ^ 1)

    @cached_property
    def edge_midpoints(self) -> np.ndarray:
        half = 2 * self.coords[self.edge_sources]
        axes = self.edge_directions // 2
        steps = np.where(self.edge_directions % 2 == 0, 1, -1)
        half[np.arange(self.n_edges), axes] += steps
        return (half % (2 * self.L)) / (2 * self.L)

    def site_index(self, coords) -> int:
        c = np.asarray(coords, dtype=np.int64) % self.L
        return int(c @ self.strides)

    def site_coords(self, site: int) -> Tuple[int, ...]:
        return tuple(int(v) for v in self.coords[site])

    def site_position(self, site: int) -> np.ndarray:
        return self.positions[site]

    def site_at(self, point) -> int:
        """Site whose position is the given point of [0,1)^d."""
        c = np.rint(np.asarray(point, dtype=float) * self.L).astype(np.int64)
        return self.site_index(c)

    def neighbour(self, site: int, axis: int, sign: str) -> int:
        return int(self.neighbours[site, direction_index(axis, sign)])

    def edge_index(self, site: int, axis: int, sign: str) -> int:
        return site * self.n_directions + direction_index(axis, sign)

    def to_dict(self) -> dict:
        return {"d": self.d, "L": self.L, "sites": self.n_sites}


@dataclass(frozen=True)
class DirectedEdge:
    source: int
    axis: int
    sign: str

    def index(self, geom: TorusGeometry) -> int:
        return geom.edge_index(self.source, self.axis, self.sign)

    def target(self, geom: TorusGeometry) -> int:
        return geom.neighbour(self.source, self.axis, self.sign)

    def reverse(self, geom: TorusGeometry) -> "DirectedEdge":
        return DirectedEdge(self.target(geom), self.axis, "-" if self.sign == "+" else "+")

    def midpoint(self, geom: TorusGeometry) -> np.ndarray:
        return geom.edge_midpoints[self.index(geom)]


def build_torus(d: int, L: int) -> TorusGeometry:
    """
    Build the discrete torus geometry.

    Args:
        d: Dimension, at least 1
        L: Sites per axis, at least 3 so that x + eps and x - eps differ

    Returns:
        TorusGeometry with periodic neighbour maps in all 2d directions

    Raises:
        DegenerateLattice: L < 3 or d < 1
        LatticeOverflow: 2d * L^d does not fit the edge index range
    """
    if d < 1:
        raise DegenerateLattice(f"dimension must be >= 1, got {d}")
    if L < 3:
        raise DegenerateLattice(f"L must be >= 3 (x+eps == x-eps for L={L})")
    if 2 * d * L**d > MAX_EDGES:
        raise LatticeOverflow(f"2d*L^d = {2 * d * L**d} exceeds the edge index range")
    geom = TorusGeometry(d=d, L=L)
    logger.debug("built torus d=%d L=%d (%d sites)", d, L, geom.n_sites)
    return geom


def eval_test_function(
    phi: TestFunction,
    point,
    l: Optional[int] = None,
    sign: Sign = None,
) -> float:
    """Closed-form value of phi (or its (l, sign) component) at a point."""
    pt = np.asarray(point, dtype=float)
    if pt.ndim != 1:
        raise UsageError("eval_test_function takes a single point")
    return phi.evaluate(pt, axis=l, sign=sign)


def enumerate_directed_edges(geom: TorusGeometry) -> List[DirectedEdge]:
    """All 2d*L^d directed edges, site-major, then axis, then +, -."""
    return [
        DirectedEdge(int(site), axis, sign)
        for site in range(geom.n_sites)
        for axis in range(geom.d)
        for sign in ("+", "-")
    ]
