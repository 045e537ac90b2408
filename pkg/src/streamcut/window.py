"""Sliding-window Max-Cut via a smooth histogram.

The histogram tracks ``f(S) = Max-Cut(S) + |S| * eps / N`` rather than
Max-Cut itself; the additive term is what makes ``f`` smooth.  Every
arrival starts a new suffix instance (a full insertion-only estimator);
whenever three consecutive instances ``i < j < k`` satisfy
``f_k >= (1 - beta) f_i`` the middle one is dropped, with
``beta = eps / 64``.  Instances that started before the window are dropped
too, except the most recent one, which brackets the window from the left.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .cut import EXACT_THRESHOLD, exact_maxcut_matrix
from .errors import ConfigError, EmptyStream
from .estimator import EstimatorConfig, InsertionEstimator
from .metric import DistanceOracle, PointId

log = logging.getLogger(__name__)

REPORT_FLOOR = 0.5


@dataclass(frozen=True)
class SmoothFunctionConfig:
    epsilon: float
    window: Optional[int]
    capacity: int

    def __post_init__(self):
        # 1/4 itself is allowed: the additive term stays <= 1/4, below the report floor
        if not 0.0 < self.epsilon <= 0.25:
            raise ConfigError(f"epsilon must lie in (0, 1/4], got {self.epsilon}")
        if self.window is not None and self.window < 1:
            raise ConfigError("window must be a positive integer")
        if self.capacity < (self.window or 1):
            raise ConfigError("capacity must be at least the window size")

    @property
    def alpha(self) -> float:
        return self.epsilon

    @property
    def beta(self) -> float:
        return self.epsilon / 64.0

    def additive(self, size: int) -> float:
        return size * self.epsilon / self.capacity


def f_value(ids: Sequence[PointId], oracle: DistanceOracle, epsilon: float,
            capacity: int, threshold: int = EXACT_THRESHOLD) -> float:
    """Exact ``Max-Cut(S) + |S| eps / N`` for a small multiset."""
    if len(ids) == 0:
        return 0.0
    D = oracle.matrix(list(ids))
    return exact_maxcut_matrix(D, threshold=threshold).value + len(ids) * epsilon / capacity


def instance_bound(epsilon: float, capacity: int, delta_max: float) -> float:
    """Live-instance budget (64/eps) ln(N^2 Delta) + 4."""
    return 64.0 / epsilon * math.log(capacity ** 2 * delta_max) + 4.0


def instance_seed(master: int, start: int) -> int:
    """Seed of the suffix instance that starts at timestamp ``start`` (1-based)."""
    return int(np.random.SeedSequence([int(master) & 0xFFFFFFFF, 0x51DE, int(start)])
               .generate_state(1)[0])


class HistogramInstance:
    __slots__ = ("start", "estimator", "count", "_value", "_fresh")

    def __init__(self, start: int, estimator: InsertionEstimator):
        self.start = start
        self.estimator = estimator
        self.count = 0
        self._value = 0.0
        self._fresh = False

    def ingest(self, pid, oracle):
        self.estimator.ingest(pid, oracle)
        self.count += 1
        self._fresh = False

    def value(self, oracle, smooth: SmoothFunctionConfig) -> float:
        if not self._fresh:
            est = self.estimator.finalize(oracle).value
            self._value = est + smooth.additive(self.count)
            self._fresh = True
        return self._value


class SlidingWindowEstimator:
    """Reports a Max-Cut estimate of the last ``window`` insertions after every event.

    ``window=None`` means an unbounded window.  ``capacity`` defaults to the
    window size (or the estimator's capacity when unbounded) and is also
    used as the estimators' stream-length bound.
    """

    def __init__(self, estimator_config: EstimatorConfig, window: Optional[int],
                 capacity: Optional[int] = None):
        if capacity is None:
            capacity = max(window or 0, estimator_config.capacity)
        self.smooth = SmoothFunctionConfig(estimator_config.epsilon, window, capacity)
        self.base = replace(estimator_config, capacity=capacity)
        self.window = window
        self.instances: list = []
        self.t = 0
        self.max_instances = 0
        self.bound = instance_bound(self.smooth.epsilon, capacity, self.base.delta_max)
        log.debug("window=%s N=%d beta=%.5f instance bound %.1f", window, capacity,
                  self.smooth.beta, self.bound)

    def _new_instance(self) -> HistogramInstance:
        cfg = replace(self.base, seed=instance_seed(self.base.seed, self.t))
        return HistogramInstance(self.t, InsertionEstimator(cfg))

    @property
    def window_start(self) -> int:
        if self.window is None:
            return 1
        return max(1, self.t - self.window + 1)

    def ingest(self, pid: PointId, oracle: DistanceOracle) -> None:
        self.t += 1
        self.instances.append(self._new_instance())
        for inst in self.instances:
            inst.ingest(pid, oracle)
        self._expire()
        self._prune(oracle)
        self.max_instances = max(self.max_instances, len(self.instances))

    def _expire(self) -> None:
        lo = self.window_start
        outside = [k for k, inst in enumerate(self.instances) if inst.start < lo]
        if len(outside) > 1:
            del self.instances[: outside[-1]]

    def _prune(self, oracle) -> None:
        keep = 1.0 - self.smooth.beta
        i = 0
        while i + 2 < len(self.instances):
            vi = self.instances[i].value(oracle, self.smooth)
            vk = self.instances[i + 2].value(oracle, self.smooth)
            if vk >= keep * vi:
                del self.instances[i + 1]
            else:
                i += 1

    def current_instance(self) -> HistogramInstance:
        if not self.instances:
            raise EmptyStream("no events ingested")
        lo = self.window_start
        for inst in self.instances:
            if inst.start >= lo:
                return inst
        return self.instances[-1]

    def f_estimate(self, oracle: DistanceOracle) -> float:
        return self.current_instance().value(oracle, self.smooth)

    def report(self, oracle: DistanceOracle) -> float:
        value = self.f_estimate(oracle)
        return value if value > REPORT_FLOOR else 0.0

    def telemetry(self) -> dict:
        inst = self.current_instance() if self.instances else None
        return {
            "instance_count": len(self.instances),
            "instance_bound": self.bound,
            "coreset_size": sum(i.estimator.coreset.size for i in self.instances),
            "reporting_start": inst.start if inst else None,
        }
