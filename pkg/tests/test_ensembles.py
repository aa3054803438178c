import math

import numpy as np
import pytest

from regdigraph import ensembles as E
from regdigraph.digraph import circulant
from regdigraph.errors import BadFunctionSpec, BadP, BadParams, DegenerateScale, InvalidZ
from regdigraph.rng import RngStream
from regdigraph.sampler import chain_sample


def test_center_Y_structure():
    A = chain_sample(40, 9, rng=1)
    Y = E.center_Y(A)
    p = 9 / 40
    np.testing.assert_allclose(Y @ np.ones(40), 0, atol=1e-12)
    vals = np.unique(np.round(Y, 12))
    np.testing.assert_allclose(vals, [-p / math.sqrt(p * (1 - p)), (1 - p) / math.sqrt(p * (1 - p))])
    # nd entries (1-p)^2 and n(n-d) entries p^2, over p(1-p): exactly n^2
    assert np.sum(Y * Y) == pytest.approx(40 ** 2)
    with pytest.raises(DegenerateScale):
        E.center_Y(circulant(4, 4))


def test_center_X_moments():
    assert np.all(E.center_X(np.ones((3, 3)), 0.5) == 1.0)
    with pytest.raises(BadP):
        E.center_X(np.ones((2, 2)), 1.0)
    gen = np.random.default_rng(2)
    for p in (0.1, 0.5):
        x = E.center_X(E.bernoulli_matrix(1000, p, gen), p).ravel()
        se_mean = 1 / math.sqrt(x.size)
        assert abs(x.mean()) <= 3 * se_mean
        se_var = math.sqrt(np.var(x * x) / x.size)
        assert abs(np.mean(x * x) - 1) <= 3 * se_var
        fourth = np.mean(x ** 4)
        assert fourth <= 1 / p + 3 * math.sqrt(np.var(x ** 4) / x.size)


def test_ensemble_spec():
    with pytest.raises(BadParams):
        E.EnsembleSpec("regular", 100, 60)
    E.EnsembleSpec("bernoulli", 1000, 800)
    with pytest.raises(BadParams):
        E.EnsembleSpec("poisson", 10)
    spec = E.EnsembleSpec("gaussian", 5, seed=3)
    np.testing.assert_array_equal(spec.sample(2), spec.sample(2))


def test_regular_samples_independent_of_order():
    st = RngStream(9)
    a = list(E.regular_samples(12, 3, 3, st))
    b = chain_sample(12, 3, rng=st.child(2).generator())
    assert a[2] == b


@pytest.mark.parametrize("z", [0, 1.0, 1 + 1j])
def test_interlacing_bound(z):
    for k in range(5):
        A = chain_sample(200, 20, rng=k)
        assert E.interlacing_ks(A, z) <= 1 / 200 + 1e-12


def test_fit_power_law():
    x = np.array([1.0, 2.0, 4.0])
    C, a, ratio = E.fit_power_law(x, 3 * x ** -0.5)
    assert C == pytest.approx(3) and a == pytest.approx(-0.5) and ratio == pytest.approx(1)
    C, a, ratio = E.fit_power_law(x, [3, 3, 3], exponent=-0.5)
    assert a == -0.5 and ratio == pytest.approx(math.sqrt(2))


def test_compare_stieltjes_same_ensemble():
    rep = E.compare_stieltjes(100, 20, 1.0, 1j, 20, rng=3, ensembles=("gaussian", "gaussian"))
    assert rep.details["difference"] <= 4 * rep.details["difference_se"]
    with pytest.raises(BadParams):
        E.compare_stieltjes(100, 20, 1.0, 1.0, 20)
    with pytest.raises(BadParams):
        E.compare_stieltjes(100, 20, 1.0, 1j, 1)


@pytest.mark.slow
def test_compare_stieltjes_decays_in_im_w():
    diffs = [E.compare_stieltjes(200, 40, 1.0, w, 50, rng=5).details["difference"]
             for w in (2j, 4j, 8j)]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[0] / diffs[2] >= 4


def test_piecewise_linear_spec():
    f = E.tent()
    assert f(0.0) == 1.0 and f(-2.0) == 0.0 and f(3.0) == 0.0
    assert f.support == (-2.0, 2.0)
    with pytest.raises(BadFunctionSpec):
        E.PiecewiseLinear((0, 1), (1, 0), 1)
    with pytest.raises(BadFunctionSpec):
        E.PiecewiseLinear((0, 1, 2), (0, 5, 0), 1)
    with pytest.raises(BadFunctionSpec):
        E.compare_linear_stat(50, 10, 0, lambda t: t, 2)


def test_linear_stat_trivial_functions():
    zero = E.PiecewiseLinear((-1.0, 1.0), (0.0, 0.0), 0.0)
    rep = E.compare_linear_stat(60, 12, 0.5, zero, 3, rng=1)
    assert rep.estimates["regular"]["mean"] == 0 and rep.estimates["bernoulli"]["mean"] == 0
    far = E.PiecewiseLinear((100.0, 101.0, 102.0), (0.0, 1.0, 0.0), 1.0)
    rep = E.compare_linear_stat(60, 12, 0.5, far, 3, rng=1)
    assert rep.estimates["regular"]["mean"] == 0


@pytest.mark.slow
def test_linear_stat_tent_regular_vs_bernoulli():
    rep = E.compare_linear_stat(1000, 200, 0.0, E.tent(), 50, rng=RngStream(41), bern_samples=20)
    assert rep.details["fraction_within_tol"] >= 0.95


def test_wegner_profile_small():
    rep = E.wegner_profile(200, 20, 1 + 1j, [0.02 * k for k in range(1, 51)], 5, rng=2)
    assert rep.passed
    assert rep.details["zero_fraction"] == 0.0
    with pytest.raises(BadParams):
        E.wegner_profile(20, 4, 0, [0.0, 0.5], 1)
    s = [np.array([0.5, 1.0, 3.0])]
    rep = E.wegner_profile(3, 1, 0, [1.0], 1, svals=s)
    assert rep.estimates["profile_mean"] == [pytest.approx(2 / 3)]


def test_validate_Z():
    n, d = 6, 2
    Z = 0.5 * np.eye(n)
    assert E.validate_Z(Z, d) == pytest.approx(0.5)
    bad = Z.copy()
    bad[0, 1] = 1.0
    with pytest.raises(InvalidZ) as exc:
        E.validate_Z(bad, d)
    assert "Z1" in str(exc.value)
    with pytest.raises(InvalidZ):
        E.validate_Z(-2 * np.eye(n), d)
    with pytest.raises(InvalidZ):
        E.validate_Z(100 * np.eye(n) - 100 / n * np.ones((n, n)), d, gamma=1.0)


def test_ssv_modes():
    rep = E.ssv_tail(60, 30, 0, samples=100, rng=RngStream(4))
    assert rep.details["singular_fraction"] == 0.0
    Z = 0.3 * np.eye(20)
    rep = E.ssv_tail(20, 4, 0, zmode="custom-Z", Z=Z, samples=5, rng=1)
    assert rep.details["min_shifted"] > 0
    with pytest.raises(InvalidZ):
        E.ssv_tail(20, 4, 0, zmode="custom-Z", samples=1)


def test_ssv_scalar_shift_scaling():
    n, d, z = 50, 10, 0.5 + 0.5j
    rep = E.ssv_tail(n, d, z, samples=3, rng=RngStream(6))
    A = chain_sample(n, d, rng=RngStream(6).child(2).generator())
    s = E.shifted_svals(E.normalized(A), z)[-1]
    assert rep.details["per_sample"][2] == pytest.approx(math.sqrt(d * (1 - d / n)) * s)


@pytest.mark.parametrize("shift", [0.0, 1.0])
def test_gaussian_order_stats(shift):
    n = 200
    M = None if shift == 0 else -shift * np.eye(n)
    rep = E.gaussian_order_stats(n, M=M, samples=10, rng=RngStream(8))
    assert rep.passed and rep.details["violations"] == 0
    assert rep.details["largest_c_passing"] > 0.01


def test_uniform_integrability_small():
    rep = E.uniform_integrability_probe(200, 40, 1.0, T=(5.0,), eps=(0.1,), samples=5, rng=3)
    assert rep.passed
    assert rep.details["exceedance"]["T=5.0,eps=0.1"] == 0.0
    s = [np.array([0.5, 1.0, 2.0])]
    rep = E.uniform_integrability_probe(3, 1, 0, T=(1.0,), svals=s)
    assert rep.details["tail_integrals"] == [[0.0]]


@pytest.mark.slow
def test_uniform_integrability_n1000():
    rep = E.uniform_integrability_probe(1000, 100, 1.0, T=(5.0,), eps=(0.1,), samples=50,
                                        rng=RngStream(43))
    assert rep.details["exceedance"]["T=5.0,eps=0.1"] == 0.0
    assert rep.passed


def test_eigenvalue_law_checks_small():
    A = chain_sample(300, 30, rng=2)
    r = E.circular_law_check(A)
    assert r["radial_ks"] < 0.1 and r["angular_ks"] < 0.1
    k = E.kesten_mckay_check([chain_sample(300, 3, rng=s) for s in range(3)])
    assert k["pooled_ks"] < 0.1


def test_report_json():
    rep = E.wegner_profile(50, 10, 1j, [0.5], 2, rng=1)
    d = rep.to_dict()
    assert d["config"]["z"] == {"re": 0.0, "im": 1.0}
