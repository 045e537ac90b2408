"""Streaming 1-median coresets.

Both backends answer ``estimate(x) = sum_c w(c) * d(x, c)``, an approximation
of the 1-median cost ``sum_{p in prefix} d(p, x)``.

``ExactPrefixCoreset`` keeps every point (zero error) and is the test oracle.

``MergeReduceCoreset`` buffers raw arrivals and, whenever the buffer fills,
merges it into the weighted summary and reduces the union.  The reduction
moves weight between representatives and charges ``weight * distance`` to a
displacement ledger ``moved``.  By the triangle inequality every query, for
any point of the metric, is off by at most ``moved``.  Merges are accepted
only while ``moved <= epsilon * LB`` where ``LB`` is a certified lower bound
on the prefix's optimal 1-median cost; because that optimum never decreases
as points arrive, the relative error stays below epsilon at every later
timestamp as well.  If deterministic merging cannot meet the size budget,
importance sampling (probability ~ 1/W + d(p, c)/cost(c) around a sampled
centre, inverse-probability reweighting) shrinks the summary; after that the
bound is only probabilistic and ``certified`` turns false.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import ConfigError
from .metric import DistanceOracle, PointId

log = logging.getLogger(__name__)


class ExactPrefixCoreset:
    """Stores the whole prefix with unit weights."""

    epsilon = 0.0
    certified = True

    def __init__(self):
        self._ids: list = []

    def insert(self, pid: PointId, oracle: DistanceOracle = None) -> None:
        self._ids.append(pid)

    def estimate(self, x: PointId, oracle: DistanceOracle) -> float:
        if not self._ids:
            oracle._row(x)
            return 0.0
        return float(oracle.distances(x, self._ids).sum())

    def points(self):
        return list(self._ids), np.ones(len(self._ids))

    @property
    def size(self) -> int:
        return len(self._ids)

    @property
    def count(self) -> int:
        return len(self._ids)

    def error_bound(self) -> float:
        return 0.0


def size_budget(epsilon: float, capacity: int, delta_max: float, constant: float = 8.0) -> int:
    """poly(1/eps, log(N * Delta)) cap on the number of stored representatives."""
    return int(math.ceil(constant * epsilon ** -2 * math.log(max(capacity * delta_max, 2.0))))


def median_lower_bound(D: np.ndarray, w: np.ndarray) -> float:
    """Lower bound on min over all metric points y of sum_c w_c d(c, y).

    Two bounds, both from the triangle inequality: the best stored point is a
    2-approximation of the best point overall, and
    ``2 W cost(y) >= sum_{a,b} w_a w_b d(a, b)``.
    """
    W = float(w.sum())
    if W <= 0 or len(w) < 2:
        return 0.0
    costs = D @ w
    pair = float(w @ costs) / (2.0 * W)
    return max(0.5 * float(costs.min()), pair)


class MergeReduceCoreset:
    """Buffered merge-and-reduce 1-median coreset with a displacement ledger.

    Parameters
    ----------
    epsilon:
        target relative error of every query.
    capacity:
        upper bound N on the stream length; enters the size budget only.
    delta_max:
        aspect-ratio bound of the metric.
    buffer_size:
        raw arrivals held before a reduction is triggered.
    size_constant:
        multiplier of the ``eps^-2 log(N Delta)`` size budget.
    seed:
        seeds the sampling fallback; the deterministic path never draws.
    """

    def __init__(self, epsilon: float, capacity: int, delta_max: float = 1.0,
                 buffer_size: int = 64, size_constant: float = 8.0, seed: int = 0):
        if not 0.0 < epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
        if capacity < 1 or buffer_size < 1:
            raise ConfigError("capacity and buffer_size must be positive")
        self.epsilon = float(epsilon)
        self.capacity = int(capacity)
        self.delta_max = float(delta_max)
        self.buffer_size = int(buffer_size)
        self.budget = size_budget(epsilon, capacity, delta_max, size_constant)
        if self.budget < 2:
            raise ConfigError("size budget below two representatives")
        self.seed = seed
        self._rng = None
        self.rep_ids: list = []
        self.rep_w = np.zeros(0)
        self.buffer: list = []
        self.moved = 0.0
        self.lower_bound = 0.0
        self.certified = True
        self.count = 0
        self.reductions = 0
        self._cache = None

    @property
    def size(self) -> int:
        return len(self.rep_ids) + len(self.buffer)

    def points(self):
        ids, w = self._arrays()
        return list(ids), w.copy()

    def _arrays(self):
        if self._cache is None:
            ids = self.rep_ids + self.buffer
            w = np.concatenate([self.rep_w, np.ones(len(self.buffer))])
            self._cache = (ids, w)
        return self._cache

    def insert(self, pid: PointId, oracle: DistanceOracle) -> None:
        self.buffer.append(pid)
        self.count += 1
        self._cache = None
        if len(self.buffer) >= self.buffer_size:
            self.reduce(oracle)

    def estimate(self, x: PointId, oracle: DistanceOracle) -> float:
        ids, w = self._arrays()
        if not ids:
            oracle._row(x)
            return 0.0
        return float(oracle.distances(x, ids) @ w)

    def error_bound(self) -> float:
        """Certified relative error of every query (inf once sampling kicked in)."""
        if not self.certified:
            return math.inf
        if self.moved == 0.0:
            return 0.0
        return self.moved / self.lower_bound if self.lower_bound > 0 else math.inf

    def reduce(self, oracle: DistanceOracle) -> None:
        ids, w = self._arrays()
        ids = list(ids)
        w = w.copy()
        if not ids:
            return
        D = oracle.matrix(ids)
        lb = median_lower_bound(D, w) - self.moved
        self.lower_bound = max(self.lower_bound, lb)
        allowed = max(self.epsilon * self.lower_bound, self.moved)
        alive, w, self.moved = _greedy_merge(D, w, self.moved, allowed)
        keep = np.flatnonzero(alive)
        self.rep_ids = [ids[k] for k in keep]
        self.rep_w = w[keep]
        if len(self.rep_ids) > self.budget:
            self._sample_down(D[np.ix_(keep, keep)])
        self.buffer = []
        self._cache = None
        self.reductions += 1

    def _sample_down(self, D: np.ndarray) -> None:
        if self._rng is None:
            self._rng = np.random.default_rng([self.seed, 0x5EED])
        w = self.rep_w
        W = w.sum()
        centre = int(self._rng.choice(len(w), p=w / W))
        d = D[centre]
        cost = float(d @ w)
        prob = w / W if cost == 0 else 0.5 * w / W + 0.5 * w * d / cost
        draws = self._rng.choice(len(w), size=self.budget, p=prob)
        counts = np.bincount(draws, minlength=len(w))
        keep = np.flatnonzero(counts)
        new_w = counts[keep] * w[keep] / (self.budget * prob[keep])
        log.warning("coreset exceeded %d representatives; sampling fallback engaged", self.budget)
        self.rep_ids = [self.rep_ids[k] for k in keep]
        self.rep_w = new_w
        self.certified = False


def _greedy_merge(D: np.ndarray, w: np.ndarray, moved: float, allowed: float):
    """Repeatedly fold the lighter end of the cheapest pair into the heavier one.

    The cost of folding i into j is ``w_i * d(i, j)``; merging stops at the
    first pair whose cost would push ``moved`` past ``allowed``.
    """
    k = len(w)
    alive = np.ones(k, dtype=bool)
    C = np.minimum.outer(w, w) * D
    np.fill_diagonal(C, np.inf)
    while k > 1:
        flat = int(np.argmin(C))
        i, j = divmod(flat, len(w))
        cost = C[i, j]
        if not np.isfinite(cost) or moved + cost > allowed:
            break
        light, heavy = (i, j) if (w[i], j) < (w[j], i) else (j, i)
        moved += w[light] * D[light, heavy]
        w[heavy] += w[light]
        w[light] = 0.0
        alive[light] = False
        C[light, :] = np.inf
        C[:, light] = np.inf
        row = np.minimum(w[heavy], w) * D[heavy]
        row[~alive] = np.inf
        row[heavy] = np.inf
        C[heavy, :] = row
        C[:, heavy] = row
        k -= 1
    return alive, w, moved


def make_coreset(kind: str, epsilon: float, capacity: int, delta_max: float,
                 buffer_size: int = 64, size_constant: float = 8.0, seed: int = 0):
    if kind == "exact":
        return ExactPrefixCoreset()
    if kind == "merge_reduce":
        return MergeReduceCoreset(epsilon, capacity, delta_max, buffer_size, size_constant, seed)
    raise ConfigError(f"unknown coreset kind {kind!r}")
