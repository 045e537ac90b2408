"""Hard dynamic-stream instance for metric Max-Cut.

Points ``p[i, j]`` sit on a grid of ``n^(2/3)`` rows by ``n^(1/3)`` columns.
Points in different rows are ``Delta`` apart, points in the same row are
``1`` apart, except that the hidden point ``p[i*, j*]`` is ``K`` away from
its row mates, ``K in {1, Delta}``.  All points are inserted column by
column, then everything outside row ``i*`` is deleted, so only the
surviving row matters: its Max-Cut is tiny for ``K = 1`` and at least
``Delta (n^(1/3) - 1)`` for ``K = Delta``.

IDs are triples ``(i, j, a[i, j])`` with a uniformly random bit, packed into
one integer; the twin ``(i, j, 1 - a[i, j])`` is an invalid ID and any query
on it fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cut import EXACT_THRESHOLD, exact_maxcut_matrix
from .errors import ConfigError, InstanceTooLarge
from .metric import DistanceOracle, MetricConfig
from .streams import StreamEvent


def _icbrt(n: int) -> Optional[int]:
    c = int(round(n ** (1.0 / 3.0)))
    for cand in (c - 1, c, c + 1):
        if cand > 0 and cand ** 3 == n:
            return cand
    return None


@dataclass
class HardInstance:
    n: int
    delta: float
    K: float
    i_star: int
    j_star: int
    bits: np.ndarray  # rows x cols, a[i, j] at bits[i-1, j-1]
    seed: int

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    def encode(self, i: int, j: int, a: int) -> int:
        return (((i - 1) * self.cols + (j - 1)) << 1) | (a & 1)

    @staticmethod
    def decode_with(cols: int, pid: int):
        a = pid & 1
        cell = pid >> 1
        return cell // cols + 1, cell % cols + 1, a

    def decode(self, pid: int):
        return self.decode_with(self.cols, pid)

    def point_id(self, i: int, j: int) -> int:
        return self.encode(i, j, int(self.bits[i - 1, j - 1]))

    def invalid_id(self, i: int, j: int) -> int:
        return self.encode(i, j, 1 - int(self.bits[i - 1, j - 1]))

    def row_ids(self, i: int) -> list:
        return [self.point_id(i, j) for j in range(1, self.cols + 1)]

    def all_ids(self) -> list:
        return [self.point_id(i, j) for j in range(1, self.cols + 1)
                for i in range(1, self.rows + 1)]


class AdversarialOracle(DistanceOracle):
    """Distance oracle of a :class:`HardInstance`; only valid IDs resolve."""

    backend = "adversarial"

    def __init__(self, inst: HardInstance, enforce: bool = True):
        super().__init__(MetricConfig(max(inst.delta, 1.0)), enforce)
        self.inst = inst
        self._valid = set(inst.all_ids())
        self._star = inst.encode(inst.i_star, inst.j_star, 0) >> 1

    def known_ids(self):
        return self.inst.all_ids()

    def _index(self, pid):
        return (pid >> 1) if pid in self._valid else None

    def _rows_distances(self, cell, cells):
        cols = self.inst.cols
        same_row = (cells // cols) == (cell // cols)
        star = (cells == self._star) | (cell == self._star)
        d = np.where(same_row, np.where(star, float(self.inst.K), 1.0), float(self.inst.delta))
        d[cells == cell] = 0.0
        return d


def hard_instance(n: int, delta: Optional[float] = None, K: Optional[float] = None,
                  seed: int = 0):
    """Build the hard instance, its oracle and its dynamic event stream.

    ``delta`` defaults to ``n**2``; ``K`` must be 1 or ``delta`` (default ``delta``).
    The oracle starts with no observed IDs.
    """
    c = _icbrt(n)
    if c is None or c < 2:
        raise ConfigError(f"n must be a perfect cube >= 8, got {n}")
    delta = float(n ** 2 if delta is None else delta)
    if delta < c:
        raise ConfigError(f"Delta must be at least n^(1/3) = {c}")
    K = delta if K is None else float(K)
    if K not in (1.0, delta):
        raise ConfigError(f"K must be 1 or Delta, got {K}")
    rows = c * c
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 0xAD5])
    bits = rng.integers(0, 2, size=(rows, c))
    i_star = int(rng.integers(1, rows + 1))
    j_star = int(rng.integers(1, c + 1))
    inst = HardInstance(n, delta, K, i_star, j_star, bits, seed)
    oracle = AdversarialOracle(inst)
    events = []
    ts = 0
    for j in range(1, c + 1):
        for i in range(1, rows + 1):
            ts += 1
            events.append(StreamEvent("+", inst.point_id(i, j), ts))
    doomed = [inst.point_id(i, j) for j in range(1, c + 1) for i in range(1, rows + 1)
              if i != i_star]
    for k in rng.permutation(len(doomed)):
        ts += 1
        events.append(StreamEvent("-", doomed[k], ts))
    return inst, oracle, events


def hard_instance_gap(inst: HardInstance, threshold: int = EXACT_THRESHOLD):
    """``(lower, upper, exact)`` for the Max-Cut of the surviving row.

    Bounds: ``[0, n^(2/3)/2]`` when ``K = 1`` and
    ``[Delta (c-1), Delta (c-1) + (c-1)(c-2)/2]`` when ``K = Delta``.
    """
    c = inst.cols
    if c > threshold:
        raise InstanceTooLarge(f"row of {c} points exceeds the exact threshold")
    oracle = AdversarialOracle(inst, enforce=False)
    D = oracle.matrix(inst.row_ids(inst.i_star))
    exact = exact_maxcut_matrix(D, threshold=threshold).value
    if inst.K == 1.0:
        low, high = 0.0, inst.n ** (2.0 / 3.0) / 2.0
    else:
        low = inst.delta * (c - 1)
        high = low + (c - 1) * (c - 2) / 2.0
    return low, high, exact


def adversary_demo(n: int, delta: Optional[float] = None, seed: int = 0, config=None) -> dict:
    """Run both values of K through a store-everything baseline and a small-space estimator.

    The baseline keeps every live ID (space grows to n) and computes the exact
    Max-Cut of the survivors, so it separates the two cases.  The small-space
    path is the insertion-only estimator, which cannot process deletions and
    therefore sees the full insertion stage; its output barely depends on K.
    An illustration only; nothing here proves a space lower bound.
    """
    from .estimator import EstimatorConfig, InsertionEstimator

    out = {"n": n, "seed": seed, "cases": []}
    for which in ("1", "Delta"):
        d = float(n ** 2 if delta is None else delta)
        K = 1.0 if which == "1" else d
        inst, oracle, events = hard_instance(n, d, K, seed)
        cfg = config or EstimatorConfig(epsilon=0.25, delta_max=d, capacity=n, samples=64,
                                        replicas=3, seed=seed)
        est = InsertionEstimator(cfg)
        live: dict = {}
        peak = 0
        for ev in events:
            if ev.kind == "+":
                oracle.observe(ev.point)
                live[ev.point] = True
                est.ingest(ev.point, oracle)
            else:
                del live[ev.point]
            peak = max(peak, len(live))
        survivors = sorted(live)
        exact = exact_maxcut_matrix(oracle.matrix(survivors)).value
        small = est.finalize(oracle)
        out["cases"].append({
            "K": K,
            "exact_survivors": exact,
            "store_everything": {"value": exact, "peak_ids": peak},
            "insertion_only": {"value": small.value,
                               "coreset_size": est.coreset.size,
                               "samplers": est.sampler.replicas},
        })
    a, b = out["cases"]
    out["store_everything_ratio"] = b["exact_survivors"] / max(a["exact_survivors"], 1e-300)
    out["insertion_only_ratio"] = (b["insertion_only"]["value"]
                                   / max(a["insertion_only"]["value"], 1e-300))
    return out
