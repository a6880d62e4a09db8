"""Ordering policy: boost axioms, scores, release gating, queue behavior."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timeboost import (
    DuplicateTransactionError,
    ScoreParams,
    SequencerQueue,
    TimeRegressionError,
    Transaction,
    order,
    release_time,
    score,
    time_boost,
)


def tx(id: str, t: float, bid: float) -> Transaction:
    return Transaction.at_seconds(id, t, bid)


def brute_force_order(txs, params):
    # Independent oracle: pairwise-comparison sort on (score desc, t, id).
    import functools

    def cmp(a, b):
        sa, sb = score(a, params), score(b, params)
        if sa != sb:
            return -1 if sa > sb else 1
        if a.t_us != b.t_us:
            return -1 if a.t_us < b.t_us else 1
        return -1 if a.id < b.id else 1

    return sorted(txs, key=functools.cmp_to_key(cmp))


class TestTimeBoost:
    def test_zero_bid_buys_nothing(self, params):
        assert time_boost(0.0, params) == 0.0

    def test_half_saturation(self, params):
        # bid == c sits exactly at g/2
        assert time_boost(1.0, params) == pytest.approx(0.25, abs=0)

    def test_huge_bid_approaches_cap(self, params):
        assert time_boost(1e9, params) == pytest.approx(0.4999999995, abs=1e-12)
        assert time_boost(1e9, params) < params.g

    def test_negative_bid_rejected(self, params):
        with pytest.raises(ValueError):
            time_boost(-1.0, params)
        with pytest.raises(ValueError):
            Transaction.at_seconds("a", 0.0, -0.5)

    @given(
        b=st.floats(min_value=0, max_value=1e12),
        g=st.floats(min_value=1e-6, max_value=1e3),
        c=st.floats(min_value=1e-6, max_value=1e6),
    )
    @settings(max_examples=300, deadline=None)
    def test_bounds_and_monotonicity(self, b, g, c):
        p = ScoreParams(g=g, c=c)
        boost = time_boost(b, p)
        assert 0.0 <= boost < g
        if b > 0:
            assert boost > 0.0
            assert time_boost(b * 2, p) > boost

    def test_concavity_second_differences(self, params, rng):
        for _ in range(2000):
            b = rng.uniform(0, 100)
            d = rng.uniform(1e-6, 10)
            second = (
                time_boost(b + 2 * d, params)
                - 2 * time_boost(b + d, params)
                + time_boost(b, params)
            )
            assert second <= 1e-15


class TestScoreAndRelease:
    def test_zero_bid_score_is_minus_arrival(self, params):
        assert score(tx("a", 5.0, 0.0), params) == -5.0

    def test_score_examples(self, params):
        assert score(tx("a", 0.0, 1.0), params) == pytest.approx(0.25, abs=1e-12)
        assert score(tx("a", 0.3, 1.0), params) == pytest.approx(-0.05, abs=1e-12)

    def test_release_examples(self, params):
        assert release_time(tx("a", 0.0, 0.0), params) == pytest.approx(0.5, abs=1e-12)
        assert release_time(tx("a", 1.0, 1.0), params) == pytest.approx(1.25, abs=1e-12)
        # The cap is approached but never attained.
        r = release_time(tx("a", 2.0, 1e15), params)
        assert r > 2.0
        assert r == pytest.approx(2.0, abs=1e-9)

    def test_release_equals_g_minus_score(self, params, rng):
        for _ in range(500):
            t = tx("a", rng.uniform(0, 100), rng.uniform(0, 50))
            assert release_time(t, params) == pytest.approx(
                params.g - score(t, params), abs=1e-12
            )


class TestGFairness:
    def test_later_by_g_never_wins(self, params, rng):
        for _ in range(10_000):
            t_a = rng.uniform(0, 100)
            a = tx("a", t_a, rng.uniform(0, 1e6))
            b = tx("b", t_a + params.g + rng.uniform(0, 10), rng.uniform(0, 1e9))
            assert score(a, params) > score(b, params)


class TestOrder:
    def test_singleton(self, params):
        a = tx("a", 1.0, 0.0)
        assert order([a], params) == [a]

    def test_pair_by_score(self, params):
        a, b = tx("a", 0.0, 0.0), tx("b", 1.0, 0.0)
        assert order({a, b}, params) == [a, b]

    def test_matches_brute_force(self, params, rng):
        for _ in range(200):
            txs = [
                tx(f"t{i}", rng.uniform(0, 2), rng.choice([0.0, rng.uniform(0, 5)]))
                for i in range(rng.randint(1, 7))
            ]
            assert order(txs, params) == brute_force_order(txs, params)

    def test_pairwise_order_independent_of_context(self, params, rng):
        # Relative order of a fixed pair is the same in any context set.
        for _ in range(500):
            a = tx("a", rng.uniform(0, 2), rng.uniform(0, 3))
            b = tx("b", rng.uniform(0, 2), rng.uniform(0, 3))
            base = order([a, b], params)
            a_first = base.index(a) < base.index(b)
            ctx = [
                tx(f"c{i}", rng.uniform(0, 2), rng.uniform(0, 3))
                for i in range(rng.randint(0, 8))
            ]
            big = order([a, b] + ctx, params)
            assert (big.index(a) < big.index(b)) == a_first

    def test_tie_break_is_arrival_then_id(self, params):
        # Same (t, bid) forces a score tie; ids decide.
        a, b = tx("a", 1.0, 2.0), tx("b", 1.0, 2.0)
        assert order([b, a], params) == [a, b]


class TestSequencerQueue:
    def test_head_is_max_score(self, params):
        q = SequencerQueue(params)
        for t in (tx("a", 1.0, 0.0), tx("b", 0.0, 2.0), tx("c", 3.0, 0.0)):
            q.push(t)
        assert q.peek().id == "b"

    def test_push_pop_single(self, params):
        q = SequencerQueue(params)
        t = tx("a", 0.0, 1.0)
        q.push(t)
        assert q.emit(10.0) == [t]
        assert len(q) == 0

    def test_duplicate_id_rejected(self, params):
        q = SequencerQueue(params)
        q.push(tx("a", 0.0, 0.0))
        with pytest.raises(DuplicateTransactionError):
            q.push(tx("a", 1.0, 1.0))

    def test_emit_clock_must_not_regress(self, params):
        q = SequencerQueue(params)
        q.emit(5.0)
        with pytest.raises(TimeRegressionError):
            q.emit(4.0)

    def test_pop_all_non_increasing_scores(self, params, rng):
        q = SequencerQueue(params)
        txs = [tx(f"t{i}", rng.uniform(0, 5), rng.uniform(0, 10)) for i in range(300)]
        for t in txs:
            q.push(t)
        out = q.emit(1e9)
        scores = [score(t, params) for t in out]
        assert scores == sorted(scores, reverse=True)
        assert out == brute_force_order(txs, params)

    def test_fcfs_degeneracy_with_zero_bids(self, params):
        q = SequencerQueue(params)
        for i, t in enumerate((0.0, 0.1, 0.2)):
            q.push(tx(f"t{i}", t, 0.0))
        assert [t.id for t in q.emit(0.2 + params.g)] == ["t0", "t1", "t2"]

    def test_big_bid_overtakes_within_g(self, params):
        q = SequencerQueue(params)
        q.push(tx("a", 0.0, 0.0))
        q.push(tx("b", 0.1, 1e9))
        out = q.emit(0.6)
        assert [t.id for t in out] == ["b", "a"]

    def test_emission_respects_release_times(self, params):
        q = SequencerQueue(params)
        q.push(tx("a", 0.0, 0.0))  # release at 0.5
        q.push(tx("b", 0.1, 1e9))  # release just above 0.1
        assert [t.id for t in q.emit(0.2)] == ["b"]
        assert [t.id for t in q.emit(0.5)] == ["a"]

    def test_emission_safety(self, params, rng):
        # Nothing arriving after `now` can outscore anything emitted at `now`.
        q = SequencerQueue(params)
        for i in range(200):
            q.push(tx(f"t{i}", rng.uniform(0, 3), rng.uniform(0, 10)))
        now = 2.0
        emitted = q.emit(now)
        assert emitted
        floor_score = min(score(t, params) for t in emitted)
        assert floor_score >= params.g - now - 1e-12
        for _ in range(200):
            late = tx("late", now + rng.uniform(1e-9, 5), rng.uniform(0, 1e9))
            assert score(late, params) < floor_score

    def test_push_cost_grows_logarithmically(self, params):
        # Comparisons per push stay under a*log2(n)+b as n doubles.
        rng = random.Random(1)
        per_push = {}
        for exp in (8, 10, 12, 14):
            n = 2**exp
            q = SequencerQueue(params)
            for i in range(n):
                q.push(tx(f"t{i}", rng.uniform(0, 1000), rng.uniform(0, 10)))
            per_push[exp] = q.comparisons / n
            assert per_push[exp] <= 4 * exp + 8
        # Doubling the size must not blow past logarithmic growth.
        assert per_push[14] <= 2.0 * per_push[8] + 4.0
