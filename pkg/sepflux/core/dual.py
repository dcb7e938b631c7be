"""
k-point correlation functions through the stirring process.

In the stirring process k labelled particles attempt nearest-neighbour moves
at rate eps^-2 per direction; a move onto another dual particle exchanges
the two labels. Starting the dual from the points x, the exclusion process
satisfies

    E[prod_i eta(x_i, t)] = sum_y p_t(y | x) prod_i p_0(y_i)

where p_0 is the product Bernoulli parameter field of the initial law. The
Monte-Carlo estimator averages the parameter product over simulated end
points; the exact oracle sums the right-hand side over ordered distinct
k-tuples by uniformization of the sparse generator.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import perm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit
from scipy import sparse
from scipy.stats import poisson

from ..errors import DuplicatePoints, StateSpaceTooLarge, UsageError
from .initcond import DensityProfile, bernoulli_field
from .stats import summarize
from .torus import TorusGeometry

logger = logging.getLogger(__name__)

MAX_EXACT_STATES = 100_000
MAX_EXACT_K = 2
# Poisson tail mass left out of the uniformization series
TAIL_MASS = 1e-12
# stirring paths per independent stream
PATH_CHUNK = 10_000


@dataclass
class StirringState:
    positions: np.ndarray
    t: float = 0.0

    @property
    def k(self) -> int:
        return int(self.positions.shape[0])

    def is_distinct(self) -> bool:
        return np.unique(self.positions).shape[0] == self.k


@dataclass(frozen=True)
class KPointEstimate:
    estimate: float
    stderr: float
    replicas: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "replicas": self.replicas}


def _check_points(points: Sequence[int], geom: TorusGeometry) -> np.ndarray:
    x = np.asarray(list(points), dtype=np.int64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise UsageError("need at least one point")
    if np.any((x < 0) | (x >= geom.n_sites)):
        raise UsageError("point outside the lattice")
    if np.unique(x).shape[0] != x.shape[0]:
        raise DuplicatePoints(f"points must be pairwise distinct: {x.tolist()}")
    return x


@njit(cache=True, nogil=True)
def _stir_move(pos, i, y):
    for j in range(pos.shape[0]):
        if pos[j] == y:
            pos[j] = pos[i]
            break
    pos[i] = y


@njit(cache=True, nogil=True)
def _stir_paths(rg, start, t, nbr, nd, L2, n_paths):
    k = start.shape[0]
    out = np.empty((n_paths, k), dtype=np.int64)
    rate = k * nd * L2
    for r in range(n_paths):
        pos = start.copy()
        s = 0.0
        while True:
            s += -np.log(1.0 - rg.random()) / rate
            if s > t:
                break
            i = rg.integers(0, k)
            _stir_move(pos, i, nbr[pos[i], rg.integers(0, nd)])
        out[r] = pos
    return out


def stirring_step(
    state: StirringState,
    geom: TorusGeometry,
    rng: np.random.Generator,
    choice: Optional[Tuple[int, int]] = None,
) -> StirringState:
    """One event of the stirring dynamics; a move onto a partner swaps labels."""
    if state.k < 1:
        raise UsageError("stirring needs at least one particle")
    rate = state.k * geom.n_directions * geom.L**2
    dt = -np.log(1.0 - rng.random()) / rate
    if choice is None:
        i = int(rng.integers(0, state.k))
        direction = int(rng.integers(0, geom.n_directions))
    else:
        i, direction = choice
    pos = state.positions.copy()
    _stir_move(pos, i, geom.neighbours[pos[i], direction])
    return StirringState(positions=pos, t=state.t + dt)


def estimate_kpoint(
    x: Sequence[int],
    t: float,
    rho0: DensityProfile,
    n: int,
    geom: TorusGeometry,
    replicas: int,
    rng: np.random.Generator,
    threads: int = 1,
) -> KPointEstimate:
    """
    Monte-Carlo estimate of E[prod_i eta(x_i, t)].

    The initial product field is evaluated exactly at the dual end points,
    so only the dual path is sampled.

    Raises:
        DuplicatePoints: repeated sites in x
        ParameterExceedsOne: infeasible initial law
    """
    start = _check_points(x, geom)
    field = bernoulli_field(rho0, n, geom)
    if t <= 0:
        return KPointEstimate(float(np.prod(field[start])), 0.0, replicas)
    n_chunks = -(-replicas // PATH_CHUNK)
    seeds = rng.integers(0, 2**63 - 1, size=n_chunks)
    sizes = [min(PATH_CHUNK, replicas - c * PATH_CHUNK) for c in range(n_chunks)]
    args = (float(t), geom.neighbours, geom.n_directions, float(geom.L**2))

    def chunk(c: int) -> np.ndarray:
        ends = _stir_paths(np.random.default_rng(int(seeds[c])), start, *args, sizes[c])
        return np.prod(field[ends], axis=1)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        values = np.concatenate(list(pool.map(chunk, range(n_chunks))))
    if replicas < 2:
        return KPointEstimate(float(values.mean()), 0.0, replicas)
    summary = summarize(values)
    return KPointEstimate(summary.mean, summary.stderr, replicas)


@dataclass
class StirringGenerator:
    """Sparse generator of the stirring process on ordered distinct k-tuples."""

    states: List[Tuple[int, ...]]
    index: Dict[Tuple[int, ...], int]
    generator: sparse.csr_matrix
    rate: float

    @property
    def size(self) -> int:
        return len(self.states)


def stirring_generator(geom: TorusGeometry, k: int, limit: int = MAX_EXACT_STATES) -> StirringGenerator:
    """
    Raises:
        StateSpaceTooLarge: more than `limit` ordered tuples, or k above the exact range
    """
    count = perm(geom.n_sites, k)
    if k > MAX_EXACT_K:
        raise StateSpaceTooLarge(
            count,
            limit,
            reason=f"exact oracle supports k <= {MAX_EXACT_K} (k={k}, {count} ordered tuples); "
            "use the Monte-Carlo estimate",
        )
    if count > limit:
        raise StateSpaceTooLarge(count, limit)
    states = list(itertools.permutations(range(geom.n_sites), k))
    index = {s: i for i, s in enumerate(states)}
    L2 = float(geom.L**2)
    rows, cols = [], []
    for src, tup in enumerate(states):
        for i in range(k):
            for direction in range(geom.n_directions):
                pos = np.array(tup, dtype=np.int64)
                _stir_move(pos, i, geom.neighbours[tup[i], direction])
                rows.append(src)
                cols.append(index[tuple(int(v) for v in pos)])
    size = len(states)
    off = sparse.csr_matrix((np.full(len(rows), L2), (rows, cols)), shape=(size, size))
    rate = k * geom.n_directions * L2
    generator = (off - sparse.identity(size, format="csr") * rate).tocsr()
    logger.debug("stirring generator k=%d: %d states, %d transitions", k, size, len(rows))
    return StirringGenerator(states=states, index=index, generator=generator, rate=rate)


def transition_distribution(gen: StirringGenerator, start: Tuple[int, ...], t: float) -> np.ndarray:
    """
    Law at time t of the dual started from `start`, by uniformization.

    The series sum_m Poisson(m; rate*t) * e_start P^m with P = I + Q/rate is
    cut where the remaining Poisson tail mass drops below TAIL_MASS.
    """
    p = np.zeros(gen.size)
    p[gen.index[tuple(start)]] = 1.0
    if t <= 0:
        return p
    mu = gen.rate * t
    n_terms = int(poisson.isf(TAIL_MASS, mu)) + 1
    weights = poisson.pmf(np.arange(n_terms + 1), mu)
    step = (sparse.identity(gen.size, format="csr") + gen.generator / gen.rate).T.tocsr()
    out = weights[0] * p
    v = p
    for m in range(1, n_terms + 1):
        v = step @ v
        out += weights[m] * v
    return out


def exact_kpoint(
    x: Sequence[int],
    t: float,
    rho0: DensityProfile,
    n: int,
    geom: TorusGeometry,
    limit: int = MAX_EXACT_STATES,
) -> float:
    """
    Exact E[prod_i eta(x_i, t)] for k <= 2 on a small lattice.

    Raises:
        DuplicatePoints: repeated sites in x
        StateSpaceTooLarge: carries the computed number of ordered tuples
    """
    start = _check_points(x, geom)
    if start.shape[0] > MAX_EXACT_K:
        stirring_generator(geom, start.shape[0], limit)
    field = bernoulli_field(rho0, n, geom)
    if t <= 0:
        return float(np.prod(field[start]))
    gen = stirring_generator(geom, start.shape[0], limit)
    dist = transition_distribution(gen, tuple(int(v) for v in start), t)
    products = np.prod(field[np.asarray(gen.states, dtype=np.int64)], axis=1)
    return float(dist @ products)
