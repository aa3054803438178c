import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from regdigraph.digraph import circulant, from_dense
from regdigraph.errors import BadDegree, Exhausted, InvalidSpec, PlanMismatch, TooLarge
from regdigraph.factor import membership_probability_exact
from regdigraph.sampler import (
    SwitchSpec,
    apply_coupling,
    build_coupling,
    chain_sample,
    chain_sample_many,
    coupling_pushforward,
    default_chain_steps,
    enumerate_regular,
    enumerate_regular_masks,
    is_switchable,
    neighborhood_switch,
    rejection_sample,
    simple_switch,
)


def brute_force(n, d):
    codes = np.arange(1 << (n * n), dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n * n)) & 1).reshape(-1, n, n)
    ok = np.all(bits.sum(axis=2) == d, axis=1) & np.all(bits.sum(axis=1) == d, axis=1)
    return {m.tobytes() for m in bits[ok].astype(np.uint8)}


@pytest.mark.parametrize("n,d", [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)])
def test_enumeration_matches_brute_force(n, d):
    got = {A.dense.tobytes() for A in enumerate_regular(n, d)}
    assert got == brute_force(n, d)


def test_enumeration_counts():
    assert len(enumerate_regular(2, 1)) == 2
    assert len(enumerate_regular(3, 1)) == 6
    assert len(enumerate_regular(4, 2)) == 90
    # two ones per row and column: 2040, 67950
    assert len(enumerate_regular_masks(5, 2)) == 2040
    assert len(enumerate_regular_masks(6, 2)) == 67950
    with pytest.raises(TooLarge):
        enumerate_regular(7, 2)


def test_simple_switch_figure_configurations():
    M = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    A = from_dense(M, 1)
    B = simple_switch(A, 0, 1, 0, 1)
    assert B.dense[:2, :2].tolist() == [[0, 1], [1, 0]]
    assert B.dense[2].tolist() == [0, 0, 1]
    C = circulant(4, 2)  # row 0 = {0, 1}
    assert simple_switch(C, 0, 1, 0, 1) is C
    with pytest.raises(InvalidSpec):
        simple_switch(C, 0, 0, 0, 1)


def test_default_steps():
    assert default_chain_steps(4, 2) == 10 * 8 * math.ceil(math.log(9))


@given(st.integers(2, 12), st.data())
def test_chain_sample_regular_and_reproducible(n, data):
    d = data.draw(st.integers(1, n - 1))
    seed = data.draw(st.integers(0, 10**9))
    A = chain_sample(n, d, steps=50 * n, rng=seed)
    A.check_invariants()
    assert A == chain_sample(n, d, steps=50 * n, rng=seed)


@pytest.mark.parametrize("proposal", ["edge", "tuple"])
def test_chain_uniform_small(proposal):
    mats = chain_sample_many(3, 1, 200, 30000, rng=7, proposal=proposal)
    codes = (mats.reshape(len(mats), -1).astype(np.int64) << np.arange(9)).sum(axis=1)
    _, counts = np.unique(codes, return_counts=True)
    assert counts.size == 6
    assert stats.chisquare(counts).pvalue > 0.001


def test_chain_bad_degree():
    with pytest.raises(BadDegree):
        chain_sample(4, 0)
    with pytest.raises(BadDegree):
        chain_sample(4, 4)


def test_rejection_acceptance_rate_matches_exact():
    p = membership_probability_exact(4, 2, 0.5)
    assert p == pytest.approx(90 * 2.0 ** -16)
    assert membership_probability_exact(2, 1, 0.5) == pytest.approx(1 / 8)
    gen = np.random.default_rng(3)
    tries = 0
    hits = 300
    for _ in range(hits):
        A, t = rejection_sample(4, 2, rng=gen, return_tries=True)
        A.check_invariants()
        tries += t
    rate = hits / tries
    assert abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / tries)


def test_rejection_small_rate():
    gen = np.random.default_rng(5)
    tries = sum(rejection_sample(2, 1, rng=gen, return_tries=True)[1] for _ in range(2000))
    rate = 2000 / tries
    assert abs(rate - 1 / 8) <= 3 * math.sqrt(1 / 8 * 7 / 8 / tries)


def test_rejection_limits():
    with pytest.raises(Exhausted):
        rejection_sample(4, 2, rng=1, max_tries=0)
    with pytest.raises(TooLarge):
        rejection_sample(20, 2, rng=1)


def test_switch_spec_validation():
    with pytest.raises(InvalidSpec):
        SwitchSpec((1, 1), (0,), (2,))
    with pytest.raises(InvalidSpec):
        SwitchSpec((0, 1), (0,), (0,))
    with pytest.raises(InvalidSpec):
        SwitchSpec((0, 1), (0, 2), (3,))


def test_neighborhood_switch_exchanges_blocks():
    # row 0 -> {0, 1}, row 2 -> {2, 3}
    A = circulant(4, 2)
    spec = SwitchSpec((0, 2), (0, 1), (2, 3))
    assert is_switchable(A, spec)
    B = neighborhood_switch(A, spec)
    assert B.out_neighbors(0).tolist() == [2, 3]
    assert B.out_neighbors(2).tolist() == [0, 1]
    assert neighborhood_switch(B, spec) == A
    bad = SwitchSpec((0, 1), (1,), (2,))
    assert not is_switchable(A, bad)
    assert neighborhood_switch(A, bad) is A


@given(st.integers(0, 10**6))
def test_neighborhood_switch_involution(seed):
    gen = np.random.default_rng(seed)
    A = chain_sample(8, 3, steps=300, rng=seed)
    i, ip = gen.choice(8, 2, replace=False)
    a, b = set(A.out_neighbors(i).tolist()), set(A.out_neighbors(ip).tolist())
    J, Jp = sorted(a - b), sorted(b - a)
    if not J:
        return
    s = int(gen.integers(1, len(J) + 1))
    spec = SwitchSpec((int(i), int(ip)), tuple(gen.choice(J, s, replace=False).tolist()),
                      tuple(gen.choice(Jp, s, replace=False).tolist()))
    B = neighborhood_switch(A, spec)
    assert B != A
    B.check_invariants()
    assert neighborhood_switch(B, spec) == A


def test_coupling_good_set_membership():
    # rows of the pair (0, 2): 0 -> {0, 1}, 2 -> {2, 3}; L = {0}, L' = {2}
    A = circulant(4, 2)
    plan = build_coupling(A, (0,), (2,), rng=0)
    assert 0 in plan.I_plus
    assert plan.J_map[0] == (0,)
    assert plan.Jprime_map[0] == (2,)


@given(st.integers(0, 10**6))
def test_coupling_plan_undoes_itself(seed):
    A = chain_sample(6, 2, steps=200, rng=seed)
    plan = build_coupling(A, (0, 1), (2, 3), rng=seed)
    B = apply_coupling(A, plan)
    assert apply_coupling(B, plan) == A


def test_plan_mismatch():
    A = circulant(4, 2)
    plan = build_coupling(A, (0,), (2,), rng=0)
    plan.xi[:] = 1
    B = from_dense(np.array([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 0, 1], [0, 1, 1, 0]]), 2)
    with pytest.raises(PlanMismatch):
        apply_coupling(B, plan)
    with pytest.raises(PlanMismatch):
        apply_coupling(circulant(6, 2), plan)
    with pytest.raises(InvalidSpec):
        build_coupling(A, (0,), (0, 1))


@pytest.mark.parametrize("L,Lp", [((0,), (1,)), ((0, 1), (2, 3)), ((3,), (0,))])
def test_coupling_pushforward_uniform(L, Lp):
    law = coupling_pushforward(4, 2, L, Lp)
    np.testing.assert_allclose(law, 1 / 90, rtol=1e-12)


def test_coupling_pushforward_not_uniform_for_wider_target():
    # frozen value: with |L'| > |L| the law is skewed
    law = coupling_pushforward(4, 2, (0,), (1, 2))
    assert law.sum() == pytest.approx(1.0)
    assert np.abs(law * 90 - 1).max() == pytest.approx(1.25)
