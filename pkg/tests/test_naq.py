import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from naqkit.bitcode import InvalidArgument
from naqkit.naq import (
    INF,
    Pool,
    PoolEntry,
    bucket_audit,
    bucketize,
    dkw_band,
    dkw_epsilon,
    dkw_monte_carlo,
    empirical_cdf,
    midrank_vs_cdf_gap,
    naq_midrank,
    naq_of,
    naq_t,
    pool_record,
    pool_stability_check,
    rank_pool,
    read_pool,
    sup_cdf_gap,
    weak_order,
)
from naqkit.oracles import cdf_direct, naq_direct

P3558 = Pool.of([3, 5, 5, 8])


def test_cdf_examples():
    assert empirical_cdf(P3558, 5) == Fraction(3, 4)
    assert empirical_cdf(P3558, 2) == 0
    assert empirical_cdf(P3558, 8) == 1


def test_infinite_entries_are_set_aside():
    pool = Pool.of([3, INF])
    assert empirical_cdf(pool, 3) == 1 and len(pool.infinite) == 1
    with pytest.raises(InvalidArgument):
        naq_midrank(INF, pool)


def test_empty_pool_rejected():
    with pytest.raises(InvalidArgument):
        empirical_cdf(Pool.of([]), 1)
    with pytest.raises(InvalidArgument):
        naq_midrank(1, Pool.of([INF]))


def test_midrank_examples():
    assert naq_midrank(5, P3558) == Fraction(1, 2)
    assert naq_midrank(9, P3558) == 1
    assert naq_midrank(2, P3558) == 0
    assert naq_midrank(7, Pool.of([7])) == Fraction(1, 2)


def test_midrank_matches_direct_count_on_random_pools():
    rng = random.Random(7)
    for _ in range(100):
        values = [rng.randint(0, 12) for _ in range(rng.randint(1, 30))]
        pool = Pool.of(values)
        for m in range(-1, 14):
            assert naq_midrank(m, pool) == naq_direct(m, values)
            assert empirical_cdf(pool, m) == cdf_direct(values, m)


@given(st.lists(st.integers(0, 20), min_size=1, max_size=25), st.integers(0, 20), st.integers(0, 20))
def test_midrank_monotone(values, a, b):
    pool = Pool.of(values)
    lo, hi = sorted((a, b))
    assert naq_midrank(lo, pool) <= naq_midrank(hi, pool)
    assert 0 <= naq_midrank(lo, pool) <= 1


@given(st.lists(st.integers(0, 20), min_size=1, max_size=25), st.randoms())
def test_midrank_relabel_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    for m in set(values):
        assert naq_midrank(m, Pool.of(values)) == naq_midrank(m, Pool.of(shuffled))


def test_gap_audit_examples():
    rep = midrank_vs_cdf_gap(P3558)
    assert rep["max_gap"] == Fraction(1, 4) and not rep["within_tie_free_bound"]
    assert rep["within_tie_adjusted_bound"]
    distinct = midrank_vs_cdf_gap(Pool.of([1, 4, 9, 16, 25]))
    assert distinct["max_gap"] == Fraction(1, 10) and distinct["within_tie_free_bound"]
    same = midrank_vs_cdf_gap(Pool.of([6] * 7))
    assert same["max_gap"] == Fraction(1, 2)


def test_bucket_examples():
    assert bucketize([10, 23], 8) == [1, 2]
    with pytest.raises(InvalidArgument):
        bucketize([1], 0)
    rep = bucket_audit([15], [17], 8, 3)
    assert rep["boundary_crossed"] and rep["buckets_a"] == [1] and rep["buckets_b"] == [2]
    assert rep["near_boundary"] == [0] and not rep["guaranteed"]
    same = bucket_audit([10, 23, 40], [10, 23, 40], 8, 0)
    assert same["orders_coincide"] and not same["boundary_crossed"]


@given(st.lists(st.integers(0, 200), min_size=1, max_size=15), st.integers(2, 16), st.data())
def test_bucket_order_preserved_away_from_edges(values, width, data):
    c = data.draw(st.integers(0, width // 2 - 1)) if width >= 2 else 0
    moved = [v + data.draw(st.integers(-c, c)) for v in values]
    rep = bucket_audit(values, moved, width, c)
    if rep["guaranteed"]:
        assert rep["orders_coincide"] and not rep["boundary_crossed"]


def test_weak_order_groups_ties():
    assert weak_order([2, 1, 2, 0]) == [[3], [1], [0, 2]]


def test_stability_examples():
    rep = pool_stability_check(Pool.of([1, 2]), Pool.of([1, 2, 3]), [2])
    assert rep["passed"] and rep["worst_slack"] == 0
    same = pool_stability_check(P3558, P3558, range(0, 10))
    assert same["passed"] and same["worst_slack"] == 0
    with pytest.raises(InvalidArgument):
        pool_stability_check(Pool.of([4]), Pool.of([1, 2]), [1])


def test_stability_randomized_nested_pools():
    rng = random.Random(11)
    for _ in range(1000):
        T = [rng.randint(0, 15) for _ in range(rng.randint(1, 12))]
        Tp = T + [rng.randint(0, 15) for _ in range(rng.randint(0, 12))]
        assert pool_stability_check(Pool.of(T), Pool.of(Tp), range(-1, 17))["passed"]


def test_dkw_examples():
    assert dkw_band(1000, 0.05) == pytest.approx(2 * math.exp(-5))
    assert round(dkw_band(1000, 0.05), 5) == 0.01348
    assert dkw_band(10, 0.001) == 1.0
    assert dkw_epsilon(1000, 0.05) == pytest.approx(0.0430, abs=1e-4)
    for bad in [(0, 0.1), (10, 0.0)]:
        with pytest.raises(InvalidArgument):
            dkw_band(*bad)
    with pytest.raises(InvalidArgument):
        dkw_epsilon(10, 1.0)


def test_sup_cdf_gap():
    assert sup_cdf_gap([0, 0, 1, 1], [0, 1], [0.5, 1.0]) == 0
    assert sup_cdf_gap([0, 0, 0, 0], [0, 1], [0.5, 1.0]) == 0.5


def test_dkw_monte_carlo_is_reproducible():
    probs = [0.05, 0.1, 0.2, 0.15, 0.1, 0.25, 0.1, 0.05]
    a = dkw_monte_carlo(probs, 1000, 2000, 0.05, seed=3)
    assert a == dkw_monte_carlo(probs, 1000, 2000, 0.05, seed=3)
    assert a["passed"] and a["atoms"] == 8
    with pytest.raises(InvalidArgument):
        dkw_monte_carlo([0.5, 0.6], 10, 10, 0.1, 0)


def test_naq_t_examples():
    pool = Pool([PoolEntry("a", 4), PoolEntry("b", 6), PoolEntry("c", 9)])
    assert naq_t("b", pool) == naq_of("b", pool) == Fraction(1, 2)
    assert naq_t("a", Pool([PoolEntry("a", 3.5)])) == Fraction(1, 2)
    # doubling one time term moves b only past the entries it crosses
    moved = Pool([PoolEntry("a", 4), PoolEntry("b", 10), PoolEntry("c", 9)])
    assert naq_t("b", moved) == Fraction(5, 6) and naq_t("a", moved) == naq_t("a", pool)


def test_rank_pool_report():
    rep = rank_pool(P3558, bucket_width=4).as_dict()
    assert [r["naq"] for r in rep["rows"]] == [Fraction(1, 8), Fraction(1, 2), Fraction(1, 2),
                                               Fraction(7, 8)]
    assert [r["bucket"] for r in rep["rows"]] == [0, 1, 1, 2]
    assert rank_pool(Pool.of(range(1000))).epsilon == pytest.approx(0.0430, abs=1e-4)


def test_read_pool_and_records():
    lines = ['{"id": "a", "m": 5}', "", '{"id": "b", "m": null, "status": "cap-exhausted"}',
             '{"id": "c", "m": 3, "caps": {"length": 20}}']
    pool = read_pool(lines)
    assert pool.values == [3, 5] and [e.id for e in pool.infinite] == ["b"]
    assert pool_record(pool.by_id("b"))["m"] is None
    with pytest.raises(InvalidArgument):
        read_pool(['{"m": 3}'])
    with pytest.raises(InvalidArgument):
        read_pool(["not json"])
