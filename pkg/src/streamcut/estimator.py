"""Insertion-only Max-Cut value estimator.

``replicas`` independent runs, each made of ``samples`` reservoir samplers,
read the stream together.  A run's estimate is the weighted Max-Cut of its
samples, each weighted by the inverse of its realised sampling probability,
divided by ``samples ** 2``.  The reported value is the median over runs.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

import numpy as np

from .coreset import make_coreset
from .cut import EXACT_THRESHOLD, WeightedPointSet, solve_matrix
from .errors import ConfigError, EmptyStream
from .metric import DistanceOracle, PointId
from .sampler import ReservoirSampler, default_K

log = logging.getLogger(__name__)


def default_samples(epsilon: float) -> int:
    return max(64, math.ceil(4.0 / epsilon ** 2) * 10)


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("MAXCUT_STREAM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class EstimatorConfig:
    epsilon: float = 0.25
    delta_max: float = 1.0
    capacity: int = 1000
    samples: Optional[int] = None
    replicas: int = 1
    exact_threshold: int = EXACT_THRESHOLD
    restarts: int = 20
    solver: str = "auto"
    coreset: str = "merge_reduce"
    buffer_size: int = 64
    K: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ConfigError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.delta_max < 1.0:
            raise ConfigError("delta_max must be >= 1")
        if self.capacity < 1:
            raise ConfigError("capacity must be positive")
        if self.replicas < 1 or self.replicas % 2 == 0:
            raise ConfigError("replicas must be an odd positive integer")
        if self.samples is not None and self.samples < 2:
            raise ConfigError("at least two samples are required")
        if self.solver not in ("auto", "exact", "local"):
            raise ConfigError(f"unknown solver {self.solver!r}")

    @property
    def m(self) -> int:
        return self.samples if self.samples is not None else default_samples(self.epsilon)

    @property
    def k(self) -> int:
        if self.K is not None:
            return self.K
        eps = 0.0 if self.coreset == "exact" else self.epsilon
        return default_K(eps, self.delta_max, self.capacity)

    @property
    def lam(self) -> float:
        eps = 0.0 if self.coreset == "exact" else self.epsilon
        return 4.0 * self.k * (1.0 + eps) / (1.0 - eps)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(m=self.m, K_effective=self.k)
        return d


@dataclass
class Estimate:
    value: float
    replica_values: list
    sample: WeightedPointSet
    solver_mode: str
    telemetry: dict = field(default_factory=dict)


def replica_seed(master: int, replica: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF, int(replica)])


class InsertionEstimator:
    """Streaming estimator; feed IDs with :meth:`ingest`, read with :meth:`finalize`."""

    def __init__(self, config: EstimatorConfig):
        self.config = config
        self.coreset = make_coreset(config.coreset, config.epsilon, config.capacity,
                                    config.delta_max, buffer_size=config.buffer_size,
                                    seed=config.seed)
        m, r = config.m, config.replicas
        self.sampler = ReservoirSampler(config.k, self.coreset, replicas=m * r,
                                        seed=replica_seed(config.seed, 0))
        self.count = 0
        log.debug("estimator m=%d replicas=%d K=%d lambda=%.1f (theory m ~ eps^-4 K^8 = %.3g)",
                  m, r, config.k, config.lam, config.epsilon ** -4 * float(config.k) ** 8)

    def ingest(self, pid: PointId, oracle: DistanceOracle) -> None:
        self.sampler.step(pid, oracle)
        self.count += 1

    def ingest_all(self, pids: Iterable[PointId], oracle: DistanceOracle) -> None:
        for pid in pids:
            self.ingest(pid, oracle)

    def telemetry(self) -> dict:
        return {"events": self.count, "coreset_size": self.coreset.size,
                "samplers": self.sampler.replicas}

    def _solve_replica(self, ids: np.ndarray, w: np.ndarray, oracle, replica: int):
        uniq, inv = np.unique(ids, return_inverse=True)
        weights = np.bincount(inv, weights=1.0 / w)
        D = oracle.matrix([int(u) for u in uniq])
        cfg = self.config
        res = solve_matrix(D, weights, solver=cfg.solver, threshold=cfg.exact_threshold,
                           restarts=cfg.restarts, seed=cfg.seed * 1000003 + replica)
        return res.value / cfg.m ** 2, res.mode

    def finalize(self, oracle: DistanceOracle) -> Estimate:
        if self.count == 0:
            raise EmptyStream("no events ingested")
        cfg = self.config
        m = cfg.m
        ids, w = self.sampler.results()
        sample = WeightedPointSet([int(i) for i in ids[:m]], 1.0 / w[:m])
        if self.sampler.q_hat == 0.0:
            # every distance seen so far is zero
            return Estimate(0.0, [0.0] * cfg.replicas, sample, "exact", self.telemetry())
        jobs = [(ids[r * m:(r + 1) * m], w[r * m:(r + 1) * m], oracle, r)
                for r in range(cfg.replicas)]
        workers = min(thread_cap(), cfg.replicas)
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                out = list(pool.map(lambda a: self._solve_replica(*a), jobs))
        else:
            out = [self._solve_replica(*a) for a in jobs]
        values = [v for v, _ in out]
        mode = "exact" if all(md == "exact" for _, md in out) else "local_search"
        return Estimate(float(np.median(values)), values, sample, mode, self.telemetry())


def estimate_stream(pids: Iterable[PointId], oracle: DistanceOracle,
                    config: EstimatorConfig, observe: bool = True) -> Estimate:
    """Run a fresh estimator over an insertion-only stream and finalize it."""
    est = InsertionEstimator(config)
    for pid in pids:
        if observe:
            oracle.observe(pid)
        est.ingest(pid, oracle)
    return est.finalize(oracle)
