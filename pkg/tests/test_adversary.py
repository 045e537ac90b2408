import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from streamcut import QueryOnUnseenId
from streamcut.adversary import (
    AdversarialOracle,
    HardInstance,
    adversary_demo,
    hard_instance,
    hard_instance_gap,
)
from streamcut.errors import ConfigError


def test_layout_and_stream_for_64_points():
    inst, oracle, events = hard_instance(64, 1000.0, 1000.0, seed=2)
    assert (inst.rows, inst.cols) == (16, 4)
    kinds = [ev.kind for ev in events]
    assert kinds == ["+"] * 64 + ["-"] * 60
    live = set()
    for ev in events:
        (live.add if ev.is_insert else live.remove)(ev.point)
    assert sorted(live) == sorted(inst.row_ids(inst.i_star))
    # insertions go column by column
    assert [inst.decode(ev.point)[1] for ev in events[:16]] == [1] * 16


def test_distances():
    inst, oracle, _ = hard_instance(64, 1000.0, 1000.0, seed=2)
    oracle.observe_all(inst.all_ids())
    assert oracle.distance(inst.point_id(1, 1), inst.point_id(2, 1)) == 1000.0
    i, (a, b) = inst.i_star, [j for j in range(1, 5) if j != inst.j_star][:2]
    assert oracle.distance(inst.point_id(i, a), inst.point_id(i, b)) == 1.0
    star = inst.point_id(i, inst.j_star)
    assert oracle.distance(star, inst.point_id(i, a)) == 1000.0


@pytest.mark.parametrize("n, delta, K, want", [
    (64, None, 1.0, 4.0),
    (64, 1000.0, 1000.0, 3000.0),
    (8, None, 1.0, 1.0),
])
def test_surviving_row_values(n, delta, K, want):
    inst, _, _ = hard_instance(n, delta, K, seed=1)
    low, high, exact = hard_instance_gap(inst)
    assert exact == want
    assert low <= exact <= high


def test_invalid_twin_ids_are_rejected():
    inst, oracle, _ = hard_instance(27, seed=4)
    oracle.observe_all(inst.all_ids())
    bogus = inst.invalid_id(2, 3)
    assert bogus != inst.point_id(2, 3)
    with pytest.raises(QueryOnUnseenId):
        oracle.observe(bogus)
    with pytest.raises(QueryOnUnseenId):
        oracle.distance(bogus, inst.point_id(2, 3))


def test_bits_depend_on_the_seed():
    a, _, _ = hard_instance(216, seed=1)
    b, _, _ = hard_instance(216, seed=2)
    assert not np.array_equal(a.bits, b.bits)
    c, _, _ = hard_instance(216, seed=1)
    assert np.array_equal(a.bits, c.bits) and (a.i_star, a.j_star) == (c.i_star, c.j_star)


@pytest.mark.parametrize("n, delta, K", [(30, None, None), (1, None, None),
                                         (64, 2.0, None), (64, 100.0, 7.0)])
def test_bad_parameters(n, delta, K):
    with pytest.raises(ConfigError):
        hard_instance(n, delta, K)


@given(st.integers(1, 16), st.integers(1, 4), st.integers(0, 1))
def test_id_encoding_round_trips(i, j, a):
    inst = HardInstance(64, 4096.0, 1.0, 1, 1, np.zeros((16, 4), dtype=int), 0)
    assert inst.decode(inst.encode(i, j, a)) == (i, j, a)


def test_oracle_knows_only_valid_ids():
    inst, _, _ = hard_instance(27, seed=0)
    o = AdversarialOracle(inst)
    assert sorted(o.known_ids()) == sorted(inst.all_ids())


def test_demo_separates_only_with_full_storage():
    out = adversary_demo(64, seed=3)
    low, high = out["cases"]
    assert low["exact_survivors"] == 4.0
    assert high["exact_survivors"] == 4096.0 * 3
    assert out["store_everything_ratio"] == pytest.approx(3072.0)
    assert low["store_everything"]["peak_ids"] == 64
    assert out["insertion_only_ratio"] < 2.0
