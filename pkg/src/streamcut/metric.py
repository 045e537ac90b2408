"""Point IDs, the distance-oracle abstraction and its metric backends.

Points are referred to by opaque integer IDs.  A :class:`DistanceOracle`
answers ``distance(a, b)`` only for IDs that have been *observed* in the
stream; anything else raises :class:`~streamcut.errors.QueryOnUnseenId`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, QueryOnUnseenId, StreamFormatError

PointId = int


@dataclass(frozen=True)
class MetricConfig:
    """Aspect-ratio contract: every non-zero distance lies in [min_nonzero, delta_max]."""

    delta_max: float
    min_nonzero: float = 1.0

    def __post_init__(self):
        if self.min_nonzero != 1.0:
            raise ConfigError("min_nonzero is fixed to 1")
        if not self.delta_max >= 1.0:
            raise ConfigError(f"delta_max must be >= 1, got {self.delta_max}")


class DistanceOracle:
    """Read-only metric access keyed by point IDs.

    Subclasses implement ``_index`` (ID -> internal row, or ``None`` for an ID
    the backend does not know) and ``_rows_distances`` (vectorised distances
    between one row and many rows).
    """

    backend = "abstract"

    def __init__(self, config: Optional[MetricConfig] = None, enforce: bool = True):
        self.config = config
        self.enforce = enforce
        self._seen: set = set()

    # -- seen-ID bookkeeping; called by the stream coordinator only
    def observe(self, pid: PointId) -> None:
        if self._index(pid) is None:
            raise QueryOnUnseenId(pid)
        self._seen.add(pid)

    def observe_all(self, pids: Iterable[PointId]) -> None:
        for pid in pids:
            self.observe(pid)

    def is_seen(self, pid: PointId) -> bool:
        return pid in self._seen

    def reset_seen(self) -> None:
        self._seen.clear()

    def known_ids(self) -> list:
        raise NotImplementedError

    def _index(self, pid):
        raise NotImplementedError

    def _rows_distances(self, row, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _row(self, pid) -> int:
        idx = self._index(pid)
        if idx is None or (self.enforce and pid not in self._seen):
            raise QueryOnUnseenId(pid)
        return idx

    def _rows(self, pids) -> np.ndarray:
        return np.fromiter((self._row(p) for p in pids), dtype=np.int64, count=len(pids))

    def distance(self, a: PointId, b: PointId) -> float:
        ra, rb = self._row(a), self._row(b)
        if a == b:
            return 0.0
        return float(self._rows_distances(ra, np.array([rb]))[0])

    def distances(self, a: PointId, bs: Sequence[PointId]) -> np.ndarray:
        """Distances from ``a`` to every ID in ``bs`` as a float array."""
        ra = self._row(a)
        if len(bs) == 0:
            return np.zeros(0)
        return self._rows_distances(ra, self._rows(bs))

    def matrix(self, ids: Sequence[PointId]) -> np.ndarray:
        """Dense pairwise distance matrix over ``ids`` (duplicates allowed)."""
        rows = self._rows(ids)
        out = np.empty((len(rows), len(rows)))
        for k, r in enumerate(rows):
            out[k] = self._rows_distances(r, rows)
        np.fill_diagonal(out, 0.0)
        return out


class MatrixOracle(DistanceOracle):
    """Explicit distance matrix; ID ``ids[k]`` owns row ``k``."""

    backend = "matrix"

    def __init__(self, matrix, ids: Optional[Sequence[PointId]] = None,
                 config: Optional[MetricConfig] = None, enforce: bool = True):
        super().__init__(config, enforce)
        self.D = np.asarray(matrix, dtype=float)
        if self.D.ndim != 2 or self.D.shape[0] != self.D.shape[1]:
            raise ConfigError("distance matrix must be square")
        ids = list(range(len(self.D))) if ids is None else list(ids)
        if len(ids) != len(self.D) or len(set(ids)) != len(ids):
            raise ConfigError("ids must be unique and match the matrix size")
        self.ids = ids
        self._pos = {pid: k for k, pid in enumerate(ids)}

    def known_ids(self):
        return list(self.ids)

    def _index(self, pid):
        return self._pos.get(pid)

    def _rows_distances(self, row, rows):
        return self.D[row, rows]


class EuclideanOracle(DistanceOracle):
    """Points with coordinates in R^d under the l2 norm."""

    backend = "euclidean"

    def __init__(self, coords, ids: Optional[Sequence[PointId]] = None,
                 config: Optional[MetricConfig] = None, enforce: bool = True):
        super().__init__(config, enforce)
        X = np.asarray(coords, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        self.X = X
        ids = list(range(len(X))) if ids is None else list(ids)
        if len(ids) != len(X) or len(set(ids)) != len(ids):
            raise ConfigError("ids must be unique and match the number of points")
        self.ids = ids
        self._pos = {pid: k for k, pid in enumerate(ids)}

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def known_ids(self):
        return list(self.ids)

    def _index(self, pid):
        return self._pos.get(pid)

    def _rows_distances(self, row, rows):
        diff = self.X[rows] - self.X[row]
        if self.X.shape[1] == 1:
            return np.abs(diff[:, 0])
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def aspect_ratio(D: np.ndarray) -> float:
    """Largest over smallest non-zero entry; 1.0 when there is no non-zero entry."""
    nz = D[D > 0]
    if nz.size == 0:
        return 1.0
    return float(nz.max() / nz.min())


@dataclass
class MetricReport:
    valid: bool
    reason: str = ""
    violation: Optional[tuple] = None

    def __bool__(self):
        return self.valid


def verify_metric(oracle: DistanceOracle, ids: Sequence[PointId],
                  max_points: int = 256, tol: float = 1e-9) -> MetricReport:
    """Exhaustively check the metric axioms and the [1, delta] band over ``ids``.

    Returns the first violation found; triangle violations are reported as the
    triple ``(a, b, c)`` with ``d(a, c) > d(a, b) + d(b, c)``, first in
    lexicographic order of positions in ``ids``.
    """
    ids = list(ids)
    if len(ids) > max_points:
        raise ConfigError(f"{len(ids)} points exceed the enumeration budget {max_points}")
    k = len(ids)
    if k == 0:
        return MetricReport(True)
    rows = oracle._rows(ids)
    D = np.empty((k, k))
    for a, r in enumerate(rows):
        D[a] = oracle._rows_distances(r, rows)
    diag = np.flatnonzero(np.diag(D) != 0.0)
    if len(diag):
        return MetricReport(False, "non-zero self distance", (ids[diag[0]],))
    neg = np.argwhere(D < 0)
    if len(neg):
        a, b = neg[0]
        return MetricReport(False, "negative distance", (ids[a], ids[b]))
    asym = np.argwhere(np.abs(D - D.T) > tol)
    if len(asym):
        a, b = asym[0]
        return MetricReport(False, "asymmetric distance", (ids[a], ids[b]))
    if oracle.config is not None:
        lo, hi = oracle.config.min_nonzero, oracle.config.delta_max
        bad = np.argwhere((D > 0) & ((D < lo - tol) | (D > hi + tol)))
        if len(bad):
            a, b = bad[0]
            return MetricReport(False, f"non-zero distance outside [{lo}, {hi}]",
                                (ids[a], ids[b]))
    for a in range(k):
        # via[b, c] = d(a, b) + d(b, c) against direct d(a, c)
        via = D[a][:, None] + D
        broken = np.argwhere(D[a][None, :] > via + tol)
        if len(broken):
            b, c = broken[0]
            return MetricReport(False, "triangle inequality", (ids[a], ids[b], ids[c]))
    return MetricReport(True)


# ---------------------------------------------------------------------------
# metric files


def load_metric(path, config: Optional[MetricConfig] = None) -> DistanceOracle:
    with open(path) as fh:
        return parse_metric(fh.read(), config=config)


def parse_metric(text: str, config: Optional[MetricConfig] = None) -> DistanceOracle:
    """Parse one of the three metric file layouts.

    ``euclidean <dim>`` followed by ``<id> <x1> ... <xdim>`` lines,
    ``matrix <n>`` followed by ``n`` rows, or a single
    ``adversarial <n> <Delta> <K> <seed>`` line.
    """
    lines = [(no, ln.split()) for no, ln in enumerate(text.splitlines(), 1)]
    lines = [(no, toks) for no, toks in lines if toks and not toks[0].startswith("#")]
    if not lines:
        raise StreamFormatError("empty metric file")
    no, head = lines[0]
    kind = head[0]
    try:
        if kind == "euclidean":
            if len(head) != 2:
                raise StreamFormatError("expected 'euclidean <dim>'", no)
            dim = int(head[1])
            ids, coords = [], []
            for no, toks in lines[1:]:
                if len(toks) != dim + 1:
                    raise StreamFormatError(f"expected id and {dim} coordinates", no)
                ids.append(int(toks[0]))
                coords.append([float(v) for v in toks[1:]])
            if len(set(ids)) != len(ids):
                raise StreamFormatError("duplicate point id")
            oracle = EuclideanOracle(np.array(coords).reshape(len(ids), dim), ids, config)
        elif kind == "matrix":
            if len(head) != 2:
                raise StreamFormatError("expected 'matrix <n>'", no)
            n = int(head[1])
            rows = lines[1:]
            if len(rows) != n:
                raise StreamFormatError(f"expected {n} matrix rows, found {len(rows)}")
            M = []
            for no, toks in rows:
                if len(toks) != n:
                    raise StreamFormatError(f"expected {n} entries", no)
                M.append([float(v) for v in toks])
            oracle = MatrixOracle(np.array(M).reshape(n, n), config=config)
        elif kind == "adversarial":
            if len(head) != 5 or len(lines) != 1:
                raise StreamFormatError("expected 'adversarial <n> <Delta> <K> <seed>'", no)
            from .adversary import hard_instance

            n, delta, K, seed = int(head[1]), float(head[2]), float(head[3]), int(head[4])
            _, oracle, _ = hard_instance(n, delta, K, seed)
        else:
            raise StreamFormatError(f"unknown metric kind {kind!r}", no)
    except ValueError as exc:
        if isinstance(exc, StreamFormatError):
            raise
        raise StreamFormatError(str(exc), no) from exc
    return oracle


def format_euclidean(ids: Sequence[PointId], coords) -> str:
    X = np.asarray(coords, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    out = [f"euclidean {X.shape[1]}"]
    for pid, row in zip(ids, X):
        out.append(" ".join([str(pid)] + [repr(float(v)) for v in row]))
    return "\n".join(out) + "\n"


def format_matrix(D) -> str:
    D = np.asarray(D, dtype=float)
    out = [f"matrix {len(D)}"]
    out += [" ".join(repr(float(v)) for v in row) for row in D]
    return "\n".join(out) + "\n"


def format_adversarial(n: int, delta: float, K: float, seed: int) -> str:
    return f"adversarial {n} {delta:g} {K:g} {seed}\n"
