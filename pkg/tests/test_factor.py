import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from regdigraph.errors import BadParams, NonIntegralD, TooLarge
from regdigraph.factor import (
    count_regular,
    factor_probability,
    find_regular_factor,
    membership_probability_exact,
    ore_ryser_exhaustive,
    ore_ryser_value,
)


def _brute_factor_exists(B, d):
    # independent oracle: search over row supports column by column
    n = B.shape[0]
    from itertools import combinations

    opts = [[c for c in combinations(np.flatnonzero(B[i]).tolist(), d)] for i in range(n)]
    cols = [0] * n

    def rec(i):
        if i == n:
            return all(c == d for c in cols)
        for c in opts[i]:
            if all(cols[j] < d for j in c):
                for j in c:
                    cols[j] += 1
                if rec(i + 1):
                    return True
                for j in c:
                    cols[j] -= 1
        return False

    return rec(0)


def test_flow_matches_exhaustive_and_certificates():
    gen = np.random.default_rng(11)
    seen = {True: 0, False: 0}
    for _ in range(500):
        n = int(gen.integers(2, 8))
        d = int(gen.integers(1, n + 1))
        p = gen.uniform(0.4, 0.95)
        B = (gen.random((n, n)) < p).astype(np.uint8)
        r = find_regular_factor(B, d)
        assert r.exists == ore_ryser_exhaustive(B, d).exists
        seen[r.exists] += 1
        if r.exists:
            F = r.factor.dense
            assert np.all(F <= B)
            assert np.all(F.sum(0) == d) and np.all(F.sum(1) == d)
            assert r.flow_value == n * d
        else:
            assert r.deficit > 0
            assert r.deficit == d * len(r.certificate) - ore_ryser_value(B, d, r.certificate)
            assert r.flow_value < n * d
    assert min(seen.values()) > 50


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(1, n),
    st.lists(st.integers(0, 1), min_size=n * n, max_size=n * n))))
def test_flow_matches_backtracking(args):
    n, d, bits = args
    B = np.array(bits, dtype=np.uint8).reshape(n, n)
    assert find_regular_factor(B, d).exists == _brute_factor_exists(B, d)


def test_edge_cases():
    B = np.zeros((3, 3), np.uint8)
    assert find_regular_factor(B, 0).exists
    assert not find_regular_factor(B, 1).exists
    assert find_regular_factor(np.ones((4, 4), np.uint8), 4).exists
    with pytest.raises(BadParams):
        find_regular_factor(B, 4)
    with pytest.raises(TooLarge):
        ore_ryser_exhaustive(np.ones((25, 25), np.uint8), 3)


def test_count_regular():
    assert count_regular(5, 0) == 1 and count_regular(5, 5) == 1
    assert count_regular(5, 1) == 120 and count_regular(5, 4) == 120
    assert count_regular(4, 2) == 90
    assert count_regular(5, 2) == 2040
    assert count_regular(6, 2) == count_regular(6, 4) == 67950


def test_membership_probability():
    assert membership_probability_exact(2, 1, 0.5) == pytest.approx(1 / 8)
    assert membership_probability_exact(4, 2, 0.5) == pytest.approx(90 * 2.0 ** -16)
    assert membership_probability_exact(3, 3, 1.0) == 1.0
    with pytest.raises(BadParams):
        membership_probability_exact(3, 1, 1.5)


def test_membership_probability_mc():
    gen = np.random.default_rng(5)
    p, N = 0.5, 200_000
    hits = 0
    for _ in range(4):
        B = gen.random((N // 4, 2, 2)) < p
        hits += int(np.sum(np.all(B.sum(1) == 1, axis=1) & np.all(B.sum(2) == 1, axis=1)))
    q = membership_probability_exact(2, 1, p)
    assert abs(hits / N - q) <= 4 * math.sqrt(q * (1 - q) / N)


def test_factor_probability():
    with pytest.raises(NonIntegralD):
        factor_probability(50, 0.3, 0.5, 1)
    with pytest.raises(BadParams):
        factor_probability(50, 0.3, 0.7, 1)
    rep = factor_probability(100, 0.4, 0.5, 20, rng=3)
    assert rep.d == 20 and rep.estimate == 1.0 and rep.fitted_c is None
    a = factor_probability(40, 0.5, 0.5, 5, rng=9)
    b = factor_probability(40, 0.5, 0.5, 5, rng=9)
    assert a.successes == b.successes
