import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from regdigraph import spectral as S
from regdigraph.errors import BadParams, TooLarge
from regdigraph.sampler import chain_sample


def cmat(gen, n):
    return gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))


def test_empirical_measure_basics():
    mu = S.EmpiricalMeasure([3.0, 1.0, 2.0, 2.0])
    assert mu.cdf(2.0) == pytest.approx(0.75)
    assert mu.cdf(0.5) == 0.0 and mu.cdf(10) == 1.0
    assert mu.quantile(0.5) == 2.0
    assert mu.mass(1.5, 3.0) == pytest.approx(0.75)
    assert mu.integrate(lambda t: t) == pytest.approx(2.0)
    sym = mu.symmetrized()
    assert sym.integrate(lambda t: t) == pytest.approx(0.0)
    avg = S.EmpiricalMeasure.average([S.EmpiricalMeasure([0.0]), S.EmpiricalMeasure([1.0, 2.0])])
    assert avg.cdf(0.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        S.EmpiricalMeasure([])
    with pytest.raises(ValueError):
        S.EmpiricalMeasure([1j, 2]).cdf(0)


@given(st.integers(0, 10**6))
def test_ks_matches_scipy_one_sample(seed):
    x = np.random.default_rng(seed).random(37)
    mine = S.ks_distance(S.EmpiricalMeasure(x), lambda t: np.clip(t, 0, 1))
    assert mine == pytest.approx(stats.kstest(x, "uniform").statistic)


@given(st.integers(0, 10**6))
def test_ks_matches_scipy_two_sample(seed):
    gen = np.random.default_rng(seed)
    a, b = gen.standard_normal(23), gen.standard_normal(31) + 0.3
    mine = S.ks_distance(S.EmpiricalMeasure(a), S.EmpiricalMeasure(b))
    assert mine == pytest.approx(stats.ks_2samp(a, b).statistic)


def test_ks_tie_tolerance():
    a = np.array([1.0, 2.0, 3.0])
    b = a + 1e-13
    assert S.ks_distance(S.EmpiricalMeasure(a), S.EmpiricalMeasure(b)) == pytest.approx(1 / 3)
    assert S.ks_distance(S.EmpiricalMeasure(a), S.EmpiricalMeasure(b), tol=1e-12) == 0.0


@pytest.mark.parametrize("z", [0j, 1 + 1j, -0.5])
def test_hermitization_spectrum(z):
    gen = np.random.default_rng(1)
    for _ in range(5):
        M = cmat(gen, 50)
        view = S.hermitize(M, z)
        s = S.singular_values(M / math.sqrt(50) - z * np.eye(50)).sorted_desc
        ev = np.sort(view.eigenvalues())
        np.testing.assert_allclose(ev, np.sort(np.concatenate([s, -s])), atol=1e-8)


@given(st.integers(0, 10**6), st.floats(0.01, 5), st.floats(-3, 3))
def test_stieltjes_bounded_and_routes_agree(seed, eta, re):
    gen = np.random.default_rng(seed)
    M = cmat(gen, 12)
    w = complex(re, eta)
    g = S.stieltjes_g(M, 0.5j, w)
    assert abs(g) <= 1 / eta + 1e-12
    assert g == pytest.approx(S.stieltjes_g(M, 0.5j, w, route="sv"), abs=1e-8)
    assert g.imag > 0


def test_stieltjes_zero_matrix():
    assert S.stieltjes_from_singular_values(np.zeros(4), 2j) == pytest.approx(-1 / 2j)
    with pytest.raises(BadParams):
        S.stieltjes_g(np.eye(3), 0, 1.0)


def test_resolvent_derivative():
    gen = np.random.default_rng(2)
    M = cmat(gen, 20)
    rep = S.resolvent_derivative_check(M, 0.3 + 0.2j, 1j, (3, 7))
    assert rep.dH_nonzeros == 2
    assert rep.dH_value == pytest.approx(1 / math.sqrt(20))
    assert rep.deviation <= 1e-4


def test_log_potential_identity_and_atoms():
    gen = np.random.default_rng(3)
    M = gen.standard_normal((30, 30))
    z = 2 + 1j
    a = S.log_potential(S.eigenvalues(M), z)
    assert a == pytest.approx(S.log_potential_sv(M, z), rel=1e-9)
    assert S.log_potential(S.EmpiricalMeasure([1.0, 2.0]), 1.0) == math.inf


def test_perron_eigenvalue():
    for k in range(5):
        A = chain_sample(30, 7, rng=k)
        ev = S.eigenvalues(A.dense).atoms
        assert np.min(np.abs(ev - 7)) <= 1e-8
        rest = S.perron_excluded(ev)
        assert rest.size == 29 and np.all(np.abs(rest) <= 7 + 1e-8)


def test_kesten_mckay_density_values():
    assert S.km_density(0, 3) == pytest.approx(2 / (9 * math.pi))
    assert S.km_density(2.0, 3) == 0.0
    with pytest.raises(ValueError):
        S.km_density(0, 1)


@pytest.mark.parametrize("d", [3, 5, 10])
def test_kesten_mckay_radial_cdf_integrates_density(d):
    for r in (0.3, 1.0, math.sqrt(d) * 0.9, math.sqrt(d)):
        val, _ = integrate.quad(lambda t: 2 * math.pi * t * float(S.km_density(t, d)), 0, r)
        assert S.km_radial_cdf(r, d) == pytest.approx(val, rel=1e-8)
    assert S.km_radial_cdf(10 * d, d) == pytest.approx(1.0)


def test_circular_radial_cdf():
    assert S.circular_radial_cdf(0.5) == 0.25
    assert S.circular_radial_cdf(2.0) == 1.0


def test_size_cap(monkeypatch):
    monkeypatch.setattr(S, "MAX_DENSE_N", 3)
    with pytest.raises(TooLarge):
        S.eigenvalues(np.eye(4))
