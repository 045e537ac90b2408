"""Metric reservoir sampling with importance weights.

A bank of ``replicas`` independent single-point samplers that read the same
stream.  At step ``t`` the prefix cost of the new point ``R_hat`` is read
from a 1-median coreset of the points seen *before* it, the running total
``Q_hat`` grows by ``2 R_hat``, and the new point replaces each replica's
sample independently with probability

    beta_t = 1 / t                     if Q_hat == 0
    beta_t = R_hat / (K * Q_hat)       otherwise.

Each replica carries ``w``, the exact probability that its current sample
was the one drawn: ``beta`` on replacement, ``w * (1 - beta)`` otherwise.

The replicas share one coreset.  Its state depends only on the stream (and,
in the sampling fallback, on its own seed), so given the coreset every
replica's draws are i.i.d.
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from .errors import ConfigError, EmptyStream
from .metric import DistanceOracle, PointId

log = logging.getLogger(__name__)


def default_K(epsilon: float, delta_max: float, capacity: int) -> int:
    """Smallest K keeping sum_k R_hat_k / Q_hat_k <= K / 2 for any stream.

    The bound used is ``1 + (1+eps)/(1-eps) * ln(Delta N^2)``.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in [0, 1), got {epsilon}")
    ratio = (1.0 + epsilon) / (1.0 - epsilon)
    return int(math.ceil(2.0 + 2.0 * ratio * math.log(max(delta_max * capacity ** 2, 1.0))))


def inclusion_probabilities(betas) -> np.ndarray:
    """Pr[final sample = p_t] = beta_t * prod_{i>t} (1 - beta_i)."""
    b = np.asarray(betas, dtype=float)
    tail = np.ones(len(b))
    if len(b) > 1:
        tail[:-1] = np.cumprod((1.0 - b)[::-1])[::-1][1:]
    return b * tail


class ReservoirSampler:
    """``replicas`` importance-sampling reservoirs over one insertion-only stream.

    ``coreset`` must provide ``estimate(x, oracle)`` and ``insert(x, oracle)``.
    ``record_betas`` keeps the beta sequence for inspection (O(n) memory).
    """

    def __init__(self, K: int, coreset, replicas: int = 1, seed=0,
                 record_betas: bool = False):
        if K < 1:
            raise ConfigError(f"K must be a positive integer, got {K}")
        if replicas < 1:
            raise ConfigError("at least one replica is required")
        self.K = int(K)
        self.coreset = coreset
        self.replicas = int(replicas)
        self.rng = np.random.default_rng(seed)
        # meaningless until the first step, which always replaces (beta_1 = 1)
        self.s = np.zeros(self.replicas, dtype=np.int64)
        self.w = np.ones(self.replicas)
        self.q_hat = 0.0
        self.t = 0
        self.last_beta: Optional[float] = None
        self.betas: Optional[list] = [] if record_betas else None

    def step(self, pid: PointId, oracle: DistanceOracle) -> float:
        """Process the next insertion and return its beta."""
        self.t += 1
        r_hat = self.coreset.estimate(pid, oracle)
        if r_hat < 0:
            log.warning("negative prefix-cost estimate %g clamped to 0", r_hat)
            r_hat = 0.0
        self.q_hat += 2.0 * r_hat
        if self.q_hat == 0.0:
            beta = 1.0 / self.t
        else:
            beta = r_hat / (self.K * self.q_hat)
        if not 0.0 <= beta <= 1.0:
            raise AssertionError(f"beta_t = {beta} outside [0, 1]; coreset contract broken")
        take = self.rng.random(self.replicas) < beta
        self.s[take] = pid
        self.w[take] = beta
        self.w[~take] *= 1.0 - beta
        self.coreset.insert(pid, oracle)
        self.last_beta = beta
        if self.betas is not None:
            self.betas.append(beta)
        return beta

    def result(self, replica: int = 0):
        """Return ``(s, w)`` for one replica."""
        if self.t == 0:
            raise EmptyStream("no events processed")
        return int(self.s[replica]), float(self.w[replica])

    def results(self):
        """Sampled IDs and their realised probabilities for every replica."""
        if self.t == 0:
            raise EmptyStream("no events processed")
        return self.s.copy(), self.w.copy()
