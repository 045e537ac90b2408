import math

import numpy as np
import pytest

from streamcut import EuclideanOracle, ExactPrefixCoreset, MergeReduceCoreset, QueryOnUnseenId
from streamcut.coreset import make_coreset, median_lower_bound, size_budget
from streamcut.errors import ConfigError


def stream(xs):
    o = EuclideanOracle(np.asarray(xs, dtype=float))
    o.observe_all(range(len(xs)))
    return o


def test_exact_mode_sums_directly():
    o = stream([0, 1, 3])
    cs = ExactPrefixCoreset()
    for i in range(3):
        cs.insert(i, o)
    assert cs.estimate(1, o) == 3
    assert cs.estimate(2, o) == 5
    ids, w = cs.points()
    assert ids == [0, 1, 2] and w.tolist() == [1, 1, 1]
    assert cs.error_bound() == 0


def test_empty_coreset_estimates_zero_but_checks_the_id():
    o = EuclideanOracle([0.0, 1.0])
    o.observe(0)
    assert ExactPrefixCoreset().estimate(0, o) == 0
    with pytest.raises(QueryOnUnseenId):
        ExactPrefixCoreset().estimate(1, o)
    assert MergeReduceCoreset(0.1, 10).estimate(0, o) == 0


def test_identical_points_cost_nothing():
    o = stream([2.0] * 200)
    cs = MergeReduceCoreset(0.25, 200, buffer_size=16)
    for i in range(200):
        cs.insert(i, o)
    assert cs.estimate(0, o) == 0
    # all mass folds into one representative at zero cost
    assert len(cs.rep_ids) == 1 and cs.moved == 0


@pytest.mark.parametrize("eps", [0.1, 0.25])
def test_merge_reduce_tracks_every_prefix(eps):
    n = 800
    rng = np.random.default_rng(11)
    xs = rng.integers(0, 1001, size=n)
    o = stream(xs)
    D = o.matrix(range(n))
    cs = MergeReduceCoreset(eps, n, 1000.0, seed=3)
    true = np.zeros(n)
    for t in range(n):
        cs.insert(t, o)
        true[:t] += D[t, :t]
        true[t] = D[t, : t + 1].sum()
        ids, w = cs.points()
        est = D[: t + 1][:, ids] @ w
        assert np.all(np.abs(est - true[: t + 1]) <= eps * true[: t + 1] + 1e-9)
        assert cs.error_bound() <= eps
        if t + 1 >= 500:
            assert cs.size < (t + 1) / 2
    assert cs.certified
    assert cs.rep_w.sum() + len(cs.buffer) == pytest.approx(n)


def test_estimate_for_points_outside_the_prefix():
    o = stream(np.arange(300) * 3.0)
    cs = MergeReduceCoreset(0.2, 300, 900.0)
    for i in range(200):
        cs.insert(i, o)
    D = o.matrix(range(300))
    for q in (250, 299):
        truth = D[q, :200].sum()
        assert abs(cs.estimate(q, o) - truth) <= 0.2 * truth


def test_lower_bound_is_below_the_optimum():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 2))
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    w = rng.uniform(0.5, 2.0, size=60)
    lb = median_lower_bound(D, w)
    assert 0 < lb <= (D @ w).min()


def test_sampling_fallback_is_flagged():
    rng = np.random.default_rng(6)
    o = stream(rng.uniform(0, 1000, size=400))
    # a budget far too small for the requested accuracy
    cs = MergeReduceCoreset(0.01, 400, 1000.0, buffer_size=32, size_constant=0.0001)
    for i in range(400):
        cs.insert(i, o)
    assert not cs.certified
    assert cs.error_bound() == math.inf
    assert len(cs.rep_ids) <= cs.budget


def test_size_budget_formula():
    assert size_budget(0.25, 1000, 10.0) == math.ceil(8 * 16 * math.log(10_000))


def test_factory_and_validation():
    assert isinstance(make_coreset("exact", 0.1, 10, 1.0), ExactPrefixCoreset)
    assert isinstance(make_coreset("merge_reduce", 0.1, 10, 1.0), MergeReduceCoreset)
    with pytest.raises(ConfigError):
        make_coreset("sketch", 0.1, 10, 1.0)
    with pytest.raises(ConfigError):
        MergeReduceCoreset(0.0, 10)
