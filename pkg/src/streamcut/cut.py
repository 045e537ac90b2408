"""Cut values and weighted Max-Cut: exhaustive enumeration and local search.

The matrix-level solvers (``exact_maxcut_matrix``, ``local_search_matrix``)
take a dense distance matrix and a weight vector; the ID-level wrappers
fetch the matrix from a :class:`~streamcut.metric.DistanceOracle` once and
delegate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, InstanceTooLarge
from .metric import DistanceOracle, PointId

EXACT_THRESHOLD = 22
_CHUNK_BITS = 16


@dataclass
class WeightedPointSet:
    """A multiset of (point, weight) entries; duplicate IDs are separate entries."""

    ids: list
    weights: np.ndarray

    def __post_init__(self):
        self.ids = list(self.ids)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.ids),):
            raise ConfigError("one weight per entry is required")
        if np.any(~(self.weights > 0)):
            raise ConfigError("weights must be strictly positive")

    @classmethod
    def unit(cls, ids: Sequence[PointId]) -> "WeightedPointSet":
        return cls(list(ids), np.ones(len(ids)))

    def __len__(self):
        return len(self.ids)


@dataclass
class CutResult:
    value: float
    partition: Optional[np.ndarray] = None
    mode: str = "exact"


def cut_value(S: Sequence[PointId], T: Sequence[PointId], oracle: DistanceOracle) -> float:
    """Sum of d(x, y) over x in S and y in T."""
    total = 0.0
    for x in S:
        total += float(oracle.distances(x, list(T)).sum())
    return total


def weighted_cut(D: np.ndarray, weights: np.ndarray, side: np.ndarray) -> float:
    """Weighted cut of a 0/1 side indicator."""
    side = np.asarray(side, dtype=bool)
    w = np.asarray(weights, dtype=float)
    return float(w[side] @ D[np.ix_(side, ~side)] @ w[~side])


_mask_cache: dict = {}


def _mask_block(bits: int, start: int, stop: int) -> np.ndarray:
    key = (bits, start, stop)
    X = _mask_cache.get(key)
    if X is None:
        masks = np.arange(start, stop, dtype=np.int64)
        X = ((masks[:, None] >> np.arange(bits)) & 1).astype(float)
        if bits <= 14:
            _mask_cache[key] = X
    return X


def exact_maxcut_matrix(D: np.ndarray, weights=None, threshold: int = EXACT_THRESHOLD) -> CutResult:
    """Exact weighted Max-Cut by enumerating 2^(n-1) partitions.

    The last entry is pinned to side 0; for an indicator x the cut equals
    ``x . (A 1) - x^T A x`` with ``A = diag(w) D diag(w)``.  Ties resolve to
    the smallest enumeration mask.
    """
    D = np.asarray(D, dtype=float)
    n = len(D)
    if n > threshold:
        raise InstanceTooLarge(f"{n} entries exceed the exact threshold {threshold}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if n < 2:
        return CutResult(0.0, np.zeros(n, dtype=bool), "exact")
    A = (w[:, None] * D) * w[None, :]
    r = A.sum(axis=1)[: n - 1]
    Ab = A[: n - 1, : n - 1]
    bits = n - 1
    total = 1 << bits
    step = 1 << _CHUNK_BITS
    best_val, best_mask = -np.inf, 0
    for start in range(0, total, step):
        X = _mask_block(bits, start, min(total, start + step))
        vals = X @ r - np.einsum("ij,ij->i", X @ Ab, X)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_mask = float(vals[k]), start + k
    side = np.zeros(n, dtype=bool)
    side[: n - 1] = (best_mask >> np.arange(bits)) & 1
    return CutResult(max(best_val, 0.0), side, "exact")


def _hill_climb(A: np.ndarray, side: np.ndarray, tol: float) -> np.ndarray:
    s = np.where(side, 1.0, -1.0)
    h = A @ s
    n = len(s)
    improved = True
    while improved:
        improved = False
        for i in range(n):
            # moving i gains the weight to same-side neighbours, loses the rest
            if s[i] * h[i] > tol:
                h -= 2.0 * s[i] * A[:, i]
                s[i] = -s[i]
                improved = True
    return s > 0


def local_search_matrix(D: np.ndarray, weights=None, restarts: int = 20,
                        seed=0) -> CutResult:
    """Best single-vertex-move local optimum over ``restarts`` random starts.

    Each restart is improved by first-improvement hill climbing in index
    order, so the result is never worse than any of the random starting cuts.
    Restart ``r`` draws its start from a generator seeded by ``(seed, r)``.
    """
    D = np.asarray(D, dtype=float)
    n = len(D)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if n < 2:
        return CutResult(0.0, np.zeros(n, dtype=bool), "local_search")
    A = (w[:, None] * D) * w[None, :]
    np.fill_diagonal(A, 0.0)
    tol = 1e-12 * max(float(A.max()), 1e-300)
    best_val, best_side = -np.inf, None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng([_seed_int(seed), r])
        side = _hill_climb(A, rng.random(n) < 0.5, tol)
        val = weighted_cut(D, w, side)
        if val > best_val:
            best_val, best_side = val, side
    return CutResult(best_val, best_side, "local_search")


def collapse_zero_distance(D: np.ndarray, weights) -> tuple:
    """Merge entries at distance zero from each other, summing their weights.

    The weighted cut is linear in the weight mass a zero-distance class puts
    on either side, so some optimum keeps every class together and the merged
    instance has the same Max-Cut value.  Returns ``(representatives, weights)``
    where representatives index the first member of each class.
    """
    D = np.asarray(D)
    w = np.asarray(weights, dtype=float)
    n = len(D)
    label = np.full(n, -1)
    reps = []
    for i in range(n):
        if label[i] >= 0:
            continue
        members = np.flatnonzero((D[i] == 0) & (label < 0))
        label[members] = len(reps)
        reps.append(i)
    merged = np.bincount(label, weights=w, minlength=len(reps))
    return np.array(reps, dtype=np.int64), merged


def solve_matrix(D: np.ndarray, weights=None, solver: str = "auto",
                 threshold: int = EXACT_THRESHOLD, restarts: int = 20, seed=0) -> CutResult:
    """Dispatch to the exact or local-search solver after zero-distance collapsing.

    ``solver='auto'`` enumerates when the collapsed instance fits under
    ``threshold`` and falls back to local search otherwise.  The returned
    partition, if any, refers to the collapsed instance.
    """
    D = np.asarray(D, dtype=float)
    w = np.ones(len(D)) if weights is None else np.asarray(weights, dtype=float)
    reps, wc = collapse_zero_distance(D, w)
    Dc = D[np.ix_(reps, reps)]
    if solver == "exact" or (solver == "auto" and len(reps) <= threshold):
        return exact_maxcut_matrix(Dc, wc, threshold=threshold)
    if solver not in ("auto", "local"):
        raise ConfigError(f"unknown solver {solver!r}")
    return local_search_matrix(Dc, wc, restarts=restarts, seed=seed)


def maxcut_exact(S: WeightedPointSet, oracle: DistanceOracle,
                 threshold: int = EXACT_THRESHOLD) -> CutResult:
    if len(S) > threshold:
        raise InstanceTooLarge(f"{len(S)} entries exceed the exact threshold {threshold}")
    return exact_maxcut_matrix(oracle.matrix(S.ids), S.weights, threshold)


def maxcut_local_search(S: WeightedPointSet, oracle: DistanceOracle,
                        restarts: int = 20, seed=0) -> CutResult:
    return local_search_matrix(oracle.matrix(S.ids), S.weights, restarts, seed)


def _seed_int(seed) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed) & 0xFFFFFFFFFFFFFFFF
    raise ConfigError(f"seed must be an integer, got {seed!r}")
