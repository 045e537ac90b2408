import numpy as np
import pytest

from instances import two_clusters
from streamcut import (
    EmptyStream,
    EstimatorConfig,
    EuclideanOracle,
    InsertionEstimator,
    estimate_stream,
)
from streamcut.errors import ConfigError
from streamcut.estimator import default_samples
from streamcut.sampler import default_K


def feed(est, o, ids):
    for i in ids:
        o.observe(i)
        est.ingest(i, o)


def test_one_event_fills_every_sampler():
    o = EuclideanOracle([5.0])
    est = InsertionEstimator(EstimatorConfig(samples=20, replicas=3))
    feed(est, o, [0])
    s, w = est.sampler.results()
    assert len(s) == 60
    assert np.all(s == 0) and np.all(w == 1.0)


def test_identical_points_return_zero():
    o = EuclideanOracle([1.0] * 6)
    est = InsertionEstimator(EstimatorConfig(samples=10))
    feed(est, o, range(6))
    assert est.sampler.q_hat == 0.0
    assert est.finalize(o).value == 0.0


def test_bookkeeping_after_a_stream():
    o = EuclideanOracle(np.random.default_rng(0).uniform(0, 10, size=100))
    est = InsertionEstimator(EstimatorConfig(delta_max=1000, capacity=100, samples=8))
    feed(est, o, range(100))
    assert est.sampler.t == 100 and est.count == 100
    assert est.telemetry()["events"] == 100


def test_finalize_requires_events():
    with pytest.raises(EmptyStream):
        InsertionEstimator(EstimatorConfig()).finalize(EuclideanOracle([0.0]))


def test_two_points_closed_form():
    # p1 is kept with probability 1 - 1/(2K), p2 with 1/(2K); a run is non-zero
    # only when both points are drawn, and then equals d / (m^2 p1 p2)
    d = 6.0
    cfg = EstimatorConfig(delta_max=1.0, capacity=2, samples=2, replicas=401,
                          coreset="exact", seed=7)
    K = default_K(0.0, 1.0, 2)
    assert cfg.k == K
    p2 = 1.0 / (2 * K)
    p1 = 1.0 - p2
    est = estimate_stream([0, 1], EuclideanOracle([0.0, d]), cfg)
    mixed = d / (4 * p1 * p2)
    vals = np.array(est.replica_values)
    assert np.all(np.isclose(vals, 0.0) | np.isclose(vals, mixed))
    hit = np.isclose(vals, mixed).mean()
    se = np.sqrt(2 * p1 * p2 * (1 - 2 * p1 * p2) / len(vals))
    assert abs(hit - 2 * p1 * p2) <= 4 * se
    assert est.value == 0.0  # the median run draws a single point


def test_median_of_replicas():
    five = EstimatorConfig(delta_max=1, capacity=40, samples=30, replicas=5, seed=3)
    est = estimate_stream(range(40), two_clusters(20, 10.0)[0], five)
    assert est.value == float(np.median(est.replica_values))
    one = EstimatorConfig(delta_max=1, capacity=40, samples=30, seed=3)
    single = estimate_stream(range(40), two_clusters(20, 10.0)[0], one)
    assert single.value == single.replica_values[0]


def test_two_clusters_with_enough_samples():
    o, truth = two_clusters(100, 100.0)
    order = [int(i) for i in np.random.default_rng(0).permutation(200)]
    cfg = EstimatorConfig(delta_max=1.0, capacity=200, samples=600, replicas=9, seed=1)
    est = estimate_stream(order, o, cfg)
    assert truth / 1.3 <= est.value <= truth * 1.3
    assert est.solver_mode == "exact"


def test_same_seed_same_answer():
    xs = np.random.default_rng(4).uniform(0, 100, size=80)
    cfg = EstimatorConfig(delta_max=1000.0, capacity=80, samples=40, replicas=3, seed=12)
    a = estimate_stream(range(80), EuclideanOracle(xs), cfg)
    b = estimate_stream(range(80), EuclideanOracle(xs), cfg)
    assert a.replica_values == b.replica_values


def test_thread_cap_does_not_change_results(monkeypatch):
    xs = np.random.default_rng(5).uniform(0, 100, size=60)
    cfg = EstimatorConfig(delta_max=1000.0, capacity=60, samples=30, replicas=5, seed=2)
    serial = estimate_stream(range(60), EuclideanOracle(xs), cfg).replica_values
    monkeypatch.setenv("MAXCUT_STREAM_THREADS", "3")
    threaded = estimate_stream(range(60), EuclideanOracle(xs), cfg).replica_values
    assert serial == threaded


def test_local_solver_for_large_samples():
    xs = np.random.default_rng(6).uniform(0, 100, size=120)
    cfg = EstimatorConfig(delta_max=1000.0, capacity=120, samples=64, solver="local",
                          exact_threshold=10, seed=0)
    est = estimate_stream(range(120), EuclideanOracle(xs), cfg)
    assert est.solver_mode == "local_search" and est.value > 0


def test_sample_weights_are_inverse_probabilities():
    xs = np.random.default_rng(8).uniform(0, 100, size=50)
    est = InsertionEstimator(EstimatorConfig(delta_max=1000.0, capacity=50, samples=16))
    o = EuclideanOracle(xs)
    feed(est, o, range(50))
    res = est.finalize(o)
    _, w = est.sampler.results()
    assert np.allclose(res.sample.weights, 1.0 / w[:16])


def test_defaults_and_validation():
    assert default_samples(0.25) == 640
    assert default_samples(0.45) == 200
    cfg = EstimatorConfig(epsilon=0.1, delta_max=10.0, capacity=100)
    assert cfg.m == 4000
    assert cfg.k == default_K(0.1, 10.0, 100)
    assert cfg.lam == pytest.approx(4 * cfg.k * 1.1 / 0.9)
    assert cfg.as_dict()["K_effective"] == cfg.k
    for bad in (dict(epsilon=0.5), dict(replicas=2), dict(samples=1), dict(delta_max=0.5),
                dict(solver="magic"), dict(capacity=0)):
        with pytest.raises(ConfigError):
            EstimatorConfig(**bad)
