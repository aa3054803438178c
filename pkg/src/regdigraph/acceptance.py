"""Acceptance suite: twenty numbered checks with fixed tolerances.

Each criterion is a function ``(ctx) -> (passed, message, details)``.
Expensive shared inputs (regular samples and their singular values) live
on a :class:`Context` so that criterion 18 reuses the matrices drawn for
criteria 11, 13, 14 and 15. ``fast`` runs everything tagged fast; ``full``
adds the n >= 1000 spectral runs.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.linalg as sla
from scipy import stats

from . import netgeom as G
from .digraph import normalized
from .ensembles import (
    EnsembleSpec,
    center_Y,
    circular_law_check,
    compare_stieltjes,
    fit_power_law,
    gaussian_matrix,
    gaussian_order_stats,
    interlacing_ks,
    kesten_mckay_check,
    shifted_svals,
    wegner_profile,
)
from .factor import factor_probability, find_regular_factor, ore_ryser_exhaustive
from .regularity import (
    expansion_consequence_violations_masks,
    expansion_holds_masks,
    check_expansion,
    verify_expansion_consequences,
)
from .rng import RngStream, default_seed
from .sampler import (
    SwitchSpec,
    apply_coupling,
    build_coupling,
    chain_sample,
    chain_sample_many,
    coupling_pushforward,
    enumerate_regular,
    enumerate_regular_masks,
    masks_to_dense,
    neighborhood_switch,
    rejection_sample,
    simple_switch,
)
from .digraph import from_dense
from .spectral import (
    EmpiricalMeasure,
    eigenvalues,
    hermitize,
    ks_distance,
    log_potential,
    log_potential_sv,
    resolvent_derivative_check,
    stieltjes_g,
)

LEVELS = {"fast": 0, "full": 1}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    binding: bool
    level: str
    elapsed: float
    message: str
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        nb = "" if self.binding else " (informational)"
        return f"criterion {self.number:2d} {tag}{nb}: {self.title}; {self.message} [{self.elapsed:.1f}s]"

    def to_dict(self):
        from .ensembles import _jsonable
        return _jsonable({"number": self.number, "title": self.title, "passed": self.passed,
                          "binding": self.binding, "level": self.level,
                          "elapsed_s": round(self.elapsed, 3), "message": self.message,
                          "details": self.details})


class Context:
    """Seeded streams plus caches of samples shared between criteria."""

    def __init__(self, seed=None):
        self.seed = default_seed() if seed is None else int(seed)
        self._cache = {}

    def stream(self, k) -> RngStream:
        return RngStream(self.seed, k)

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # shared regular ensembles
    def circ(self):
        def make():
            A = chain_sample(2000, 200, rng=self.stream(11).generator())
            res = circular_law_check(A)
            return {"check": res, "interlacing": [interlacing_ks(A, 0)]}
        return self.cached("circ", make)

    def pool_1000_100(self):
        """50 samples at (1000, 100) with s_n(A), svals of Abar - z and Y/sqrt(n) - z, z = 1+i."""
        def make():
            z = 1 + 1j
            st = self.stream(13)
            out = {"sn": [], "s_abar": [], "s_y": []}
            for k in range(50):
                A = chain_sample(1000, 100, rng=st.child(k).generator())
                out["sn"].append(float(sla.svdvals(A.dense.astype(float))[-1]))
                out["s_abar"].append(shifted_svals(normalized(A), z))
                out["s_y"].append(shifted_svals(center_Y(A), z, 1 / math.sqrt(1000)))
            return out
        return self.cached("pool13", make)

    def pool_1000_200(self):
        """20 regular and 20 Gaussian samples at n = 1000, svals at z in {0, 1}."""
        def make():
            st = self.stream(15)
            n, zs = 1000, (0.0, 1.0)
            out = {z: {"s_y": [], "s_abar": [], "s_g": []} for z in zs}
            for k in range(20):
                A = chain_sample(n, 200, rng=st.child(0).child(k).generator())
                Y, Ab = center_Y(A), normalized(A)
                for z in zs:
                    out[z]["s_y"].append(shifted_svals(Y, z, 1 / math.sqrt(n)))
                    out[z]["s_abar"].append(shifted_svals(Ab, z))
            for k in range(20):
                Gm = gaussian_matrix(n, st.child(1).child(k).generator())
                for z in zs:
                    out[z]["s_g"].append(shifted_svals(Gm, z, 1 / math.sqrt(n)))
            return out
        return self.cached("pool15", make)


CRITERIA = {}


def criterion(number, title, level="fast", binding=True):
    def deco(fn):
        CRITERIA[number] = (title, level, binding, fn)
        return fn
    return deco


def _cgauss(gen, shape):
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


@criterion(1, "Hermitization eigenvalues equal +-singular values")
def c01(ctx):
    gen = ctx.stream(1).generator()
    worst = 0.0
    for _ in range(20):
        M = _cgauss(gen, (50, 50))
        for z in (0j, 1 + 1j):
            view = hermitize(M, z)
            ev = np.sort(view.eigenvalues())
            s = sla.svdvals(view.block())
            worst = max(worst, float(np.abs(ev - np.sort(np.concatenate([s, -s]))).max()))
    return worst <= 1e-8, f"max deviation {worst:.2e} (tol 1e-8)", {"max_deviation": worst}


@criterion(2, "resolvent norm bound and direct-vs-sv Stieltjes agreement")
def c02(ctx):
    gen = ctx.stream(2).generator()
    excess, gap = -math.inf, 0.0
    for t in range(20):
        M = _cgauss(gen, (50, 50))
        z = (0j, 1 + 1j)[t % 2]
        view = hermitize(M, z)
        for w in (1j, 0.1j, 1 + 1j):
            R = view.resolvent(w)
            excess = max(excess, float(np.linalg.norm(R, 2) - 1 / w.imag))
            gap = max(gap, abs(stieltjes_g(M, z, w) - stieltjes_g(M, z, w, route="sv")))
    ok = excess <= 1e-10 and gap <= 1e-8
    return ok, f"max ||R|| - 1/Im w = {excess:.2e}, max |g_direct - g_sv| = {gap:.2e}", \
        {"norm_excess": excess, "stieltjes_gap": gap}


@criterion(3, "resolvent derivative identity")
def c03(ctx):
    gen = ctx.stream(3).generator()
    worst = 0.0
    for _ in range(10):
        M = _cgauss(gen, (20, 20))
        z = complex(*gen.uniform(-1, 1, 2))
        i, j = (int(v) for v in gen.integers(0, 20, 2))
        worst = max(worst, resolvent_derivative_check(M, z, 1j, (i, j), h=1e-6).deviation)
    return worst <= 1e-4, f"max deviation {worst:.2e} (tol 1e-4)", {"max_deviation": worst}


@criterion(4, "log-potential identity")
def c04(ctx):
    gen = ctx.stream(4).generator()
    z = 2 + 1j
    worst = 0.0
    for _ in range(20):
        M = gen.standard_normal((30, 30))
        a = log_potential(eigenvalues(M), z)
        b = log_potential_sv(M, z)
        worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-6, f"max relative deviation {worst:.2e} (tol 1e-6)", {"max_relative": worst}


def brute_force_count(n, d):
    """|A(n, d)| by scanning all 2^(n^2) 0-1 matrices."""
    codes = np.arange(1 << (n * n), dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n * n)) & 1).reshape(-1, n, n)
    ok = np.all(bits.sum(axis=2) == d, axis=1) & np.all(bits.sum(axis=1) == d, axis=1)
    return int(ok.sum()), codes[ok]


@criterion(5, "enumeration counts")
def c05(ctx):
    counts = {(2, 1): len(enumerate_regular(2, 1)), (3, 1): len(enumerate_regular(3, 1)),
              (4, 2): len(enumerate_regular(4, 2))}
    brute, codes = brute_force_count(4, 2)
    masks = enumerate_regular_masks(4, 2)
    enum_codes = np.sort((masks << (4 * np.arange(4))).sum(axis=1))
    same = bool(np.array_equal(enum_codes, np.sort(codes)))
    ok = counts == {(2, 1): 2, (3, 1): 6, (4, 2): 90} and brute == 90 and same
    return ok, f"counts {list(counts.values())}, brute force {brute}, same set {same}", \
        {"counts": {str(k): v for k, v in counts.items()}, "brute_force": brute}


def _class_index(mats, n, d):
    """Index of each dense matrix in the enumeration of A(n, d)."""
    masks = enumerate_regular_masks(n, d)
    codes = (masks << (n * np.arange(n))).sum(axis=1)
    lookup = {int(c): k for k, c in enumerate(codes)}
    w = np.left_shift(1, np.arange(n * n, dtype=np.int64))
    mc = (np.asarray(mats, dtype=np.int64).reshape(len(mats), -1) * w).sum(axis=1)
    return np.array([lookup[int(c)] for c in mc]), len(codes)


@criterion(6, "switch chain uniform on A(4,2)")
def c06(ctx):
    mats = chain_sample_many(4, 2, 200, 10**5, rng=ctx.stream(6))
    idx, K = _class_index(mats, 4, 2)
    counts = np.bincount(idx, minlength=K)
    chi2, p = stats.chisquare(counts)
    return p > 0.001, f"chi2 {chi2:.1f} on {K - 1} dof, p = {p:.3g} (need > 0.001)", \
        {"chi2": float(chi2), "p": float(p), "min_count": int(counts.min())}


@criterion(7, "coupling preserves the uniform law on A(4,2)")
def c07(ctx):
    st = ctx.stream(7)
    gen = st.generator()
    allA = enumerate_regular(4, 2)
    draws = gen.integers(0, len(allA), size=10**5)
    L, Lp = (0,), (1, 2)
    out = []
    moved = 0
    for t, k in enumerate(draws):
        A = allA[k]
        B = apply_coupling(A, build_coupling(A, L, Lp, rng=gen))
        moved += B is not A
        out.append(B.dense)
    idx, K = _class_index(out, 4, 2)
    counts = np.bincount(idx, minlength=K)
    chi2, p = stats.chisquare(counts)
    exact = coupling_pushforward(4, 2, L, Lp)
    dev = float(np.abs(exact * K - 1).max())
    return p > 0.001, (f"L={L}, L'={Lp}: chi2 {chi2:.1f}, p = {p:.3g}; {moved} of {draws.size} "
                       f"draws moved; exact pushforward max relative deviation {dev:.3f}"), \
        {"chi2": float(chi2), "p": float(p), "moved": moved, "exact_max_relative_deviation": dev}


def _random_switch(A, gen):
    """A switchable spec for A when one exists at a random row pair, else a random spec."""
    n = A.n
    i, ip = (int(v) for v in gen.choice(n, 2, replace=False))
    a, b = set(A.out_neighbors(i).tolist()), set(A.out_neighbors(ip).tolist())
    J, Jp = sorted(a - b), sorted(b - a)
    if J and gen.random() < 0.8:
        s = int(gen.integers(1, len(J) + 1))
        return SwitchSpec((i, ip), tuple(gen.choice(J, s, replace=False).tolist()),
                          tuple(gen.choice(Jp, s, replace=False).tolist()))
    cols = gen.permutation(n)
    s = int(gen.integers(1, n // 2 + 1))
    return SwitchSpec((i, ip), tuple(cols[:s].tolist()), tuple(cols[s:2 * s].tolist()))


@criterion(8, "switching involutions and expansion stability on A(6,2)")
def c08(ctx):
    st = ctx.stream(8)
    gen = st.child(0).generator()
    inv_fail = 0
    nontrivial = 0
    for t in range(1000):
        A = chain_sample(8, 3, steps=200, rng=gen)
        i1, i2 = (int(v) for v in gen.choice(8, 2, replace=False))
        j1, j2 = (int(v) for v in gen.choice(8, 2, replace=False))
        B = simple_switch(A, i1, i2, j1, j2)
        inv_fail += simple_switch(B, i1, i2, j1, j2) != A
        spec = _random_switch(A, gen)
        C = neighborhood_switch(A, spec)
        nontrivial += C != A
        inv_fail += neighborhood_switch(C, spec) != A
    # expansion stability, exhaustive over the certified part of A(6,2)
    n, d, kappa = 6, 2, 0.4
    rows = enumerate_regular_masks(n, d)
    cert = expansion_holds_masks(rows, n, d, kappa)
    half_ok = expansion_holds_masks(rows, n, d, kappa / 2)
    codes = (rows << (n * np.arange(n))).sum(axis=1)
    ok_code = dict(zip(codes.tolist(), half_ok.tolist()))
    w = np.left_shift(1, np.arange(n * n, dtype=np.int64))
    dense = masks_to_dense(rows, n)
    g2 = st.child(1).generator()
    subsets = [c for s in (1, 2) for c in combinations(range(n), s)]
    viol = moved = 0
    for k in np.flatnonzero(cert):
        A = from_dense(dense[k], d)
        L = subsets[int(g2.integers(len(subsets)))]
        rest = [j for j in range(n) if j not in L]
        Lp = tuple(sorted(g2.choice(rest, int(g2.integers(1, 3)), replace=False).tolist()))
        B = apply_coupling(A, build_coupling(A, L, Lp, rng=g2))
        moved += B is not A
        viol += not ok_code[int((B.dense.astype(np.int64).ravel() * w).sum())]
    ok = inv_fail == 0 and viol == 0
    msg = (f"{inv_fail} involution failures ({nontrivial} nontrivial neighborhood switches); "
           f"{viol} stability violations over {int(cert.sum())} certified inputs ({moved} moved)")
    return ok, msg, {"involution_failures": inv_fail, "stability_violations": viol,
                     "certified": int(cert.sum()), "moved": moved,
                     "certified_half_fraction": float(half_ok.mean())}


@criterion(9, "expansion consequences on certified A(6,2)")
def c09(ctx):
    n, d, kappa = 6, 2, 0.4
    rows = enumerate_regular_masks(n, d)
    cert = expansion_holds_masks(rows, n, d, kappa)
    viol = expansion_consequence_violations_masks(rows[cert], n, d, kappa)
    # spot-check the per-instance API against the vectorized path
    gen = ctx.stream(9).generator()
    dense = masks_to_dense(rows, n)
    api_fail = 0
    for k in gen.choice(np.flatnonzero(cert), 20, replace=False):
        A = from_dense(dense[k], d)
        rep = verify_expansion_consequences(A, kappa, expansion=check_expansion(A, kappa))
        api_fail += not rep.passed
    total = int(viol.sum()) + api_fail
    return total == 0, f"{int(viol.sum())} violations over {int(cert.sum())} instances; " \
        f"{api_fail} API disagreements", {"violations": int(viol.sum()), "certified": int(cert.sum())}


@criterion(10, "reflection: spectra of -A and J - A")
def c10(ctx):
    from .digraph import integer_spectrum, match_spectra
    st = ctx.stream(10)
    worst = worst_float = 0
    for k in range(20):
        A = chain_sample(8, 3, rng=st.child(k).generator())
        M = A.dense.astype(np.int64)
        J = np.ones((8, 8), dtype=np.int64)
        worst = max(worst, match_spectra(integer_spectrum(-M), integer_spectrum(J - M), 1e-6))
        worst_float = max(worst_float, match_spectra(np.linalg.eigvals(-M.astype(float)),
                                                     np.linalg.eigvals((J - M).astype(float)), 1e-6))
    return worst <= 1, f"at most {worst} unmatched eigenvalue(s) per sample " \
        f"(plain LAPACK eigenvalues: {worst_float})", \
        {"max_unmatched": worst, "max_unmatched_lapack": worst_float}


@criterion(11, "circular law at n=2000, d=200", level="full")
def c11(ctx):
    r = ctx.circ()["check"]
    ok = r["radial_ks"] <= 0.05 and r["angular_ks"] <= 0.05
    return ok, f"radial KS {r['radial_ks']:.4f}, angular KS {r['angular_ks']:.4f} (tol 0.05)", \
        {"radial_ks": r["radial_ks"], "angular_ks": r["angular_ks"]}


@criterion(12, "oriented Kesten-McKay law at d=3", binding=False)
def c12(ctx):
    st = ctx.stream(12)
    As = [chain_sample(1000, 3, rng=st.child(k).generator()) for k in range(5)]
    r = kesten_mckay_check(As)
    return r["pooled_ks"] <= 0.08, f"pooled radial KS {r['pooled_ks']:.4f} (tol 0.08), " \
        f"per sample max {max(r['per_sample_ks']):.4f}", r


@criterion(13, "smallest singular values at n=1000, d=100, z=1+i", level="full")
def c13(ctx):
    P = ctx.pool_1000_100()
    n = 1000
    sn = min(P["sn"])
    shifted = min(float(s[-1]) for s in P["s_abar"])
    ok = sn > 1e-10 and shifted >= n ** -2.0
    return ok, f"min s_n(A) = {sn:.3e}, min s_n(Abar - z) = {shifted:.3e} (need >= {n ** -2.0:.0e})", \
        {"min_sn_A": sn, "min_sn_shifted": shifted}


@criterion(14, "Wegner profile at n=1000, d=100, z=1+i", level="full")
def c14(ctx):
    P = ctx.pool_1000_100()
    etas = [0.02 * k for k in range(1, 51)]
    rep = wegner_profile(1000, 100, 1 + 1j, etas, 20, svals=P["s_y"][:20], C=10.0)
    return bool(rep.passed), f"{rep.details['fraction_ok']:.0%} of samples within bound; " \
        f"fitted C {rep.details['fitted_C']:.3f}", rep.details


@criterion(15, "regular vs Gaussian singular value laws at n=1000, d=200", level="full")
def c15(ctx):
    P = ctx.pool_1000_200()
    ks = {}
    for z, v in P.items():
        reg = EmpiricalMeasure.average(EmpiricalMeasure(s) for s in v["s_y"])
        gau = EmpiricalMeasure.average(EmpiricalMeasure(s) for s in v["s_g"])
        ks[z] = ks_distance(reg, gau)
    ok = all(k <= 0.05 for k in ks.values())
    return ok, ", ".join(f"KS(z={z:g}) = {k:.4f}" for z, k in ks.items()) + " (tol 0.05)", \
        {f"ks_z{z:g}": k for z, k in ks.items()}


@criterion(16, "Stieltjes comparison decay in d", level="full")
def c16(ctx):
    st = ctx.stream(16)
    ds = (50, 200, 800)
    for d in ds:
        EnsembleSpec("bernoulli", 1000, d)
    reps = [compare_stieltjes(1000, d, 1.0, 1j, 50, st.child(k)) for k, d in enumerate(ds)]
    diffs = [r.details["difference"] for r in reps]
    ses = [r.details["difference_se"] for r in reps]
    mono = all(a > b for a, b in zip(diffs, diffs[1:]))
    C, _, ratio = fit_power_law(ds, diffs, exponent=-0.5)
    ok = mono and ratio <= 3
    msg = ("differences " + ", ".join(f"{x:.2e}+-{s:.1e}" for x, s in zip(diffs, ses))
           + f"; monotone {mono}; worst ratio to fitted C d^-1/2 = {ratio:.2f} (need <= 3)")
    return ok, msg, {"d": list(ds), "differences": diffs, "standard_errors": ses,
                     "fitted_C": C, "max_ratio": ratio, "monotone": mono}


@criterion(17, "Gaussian order statistics at n=500")
def c17(ctx):
    st = ctx.stream(17)
    n = 500
    viol = {}
    for k, (name, M) in enumerate((("0", None), ("-I", -np.eye(n)))):
        rep = gaussian_order_stats(n, M=M, samples=50, rng=st.child(k))
        viol[name] = rep.details["violations"]
    total = sum(viol.values())
    return total == 0, f"violations {viol}", {"violations": viol}


@criterion(18, "interlacing of centered and normalized spectra", level="full")
def c18(ctx):
    n = 1000
    vals = list(ctx.circ()["interlacing"])
    bounds = [1 / 2000]
    P = ctx.pool_1000_100()
    for sy, sa in zip(P["s_y"], P["s_abar"]):
        tol = 1e-9 * max(sy.max(), sa.max(), 1.0)
        vals.append(ks_distance(EmpiricalMeasure(sy), EmpiricalMeasure(sa), tol=tol))
        bounds.append(1 / n)
    for z, v in ctx.pool_1000_200().items():
        for sy, sa in zip(v["s_y"], v["s_abar"]):
            tol = 1e-9 * max(sy.max(), sa.max(), 1.0)
            vals.append(ks_distance(EmpiricalMeasure(sy), EmpiricalMeasure(sa), tol=tol))
            bounds.append(1 / n)
    excess = max(v - b for v, b in zip(vals, bounds))
    ok = excess <= 1e-12
    return ok, f"{len(vals)} samples, max KS - 1/n = {excess:.1e}", \
        {"samples": len(vals), "max_ks_times_n": max(v / b * 1 for v, b in zip(vals, bounds))}


def random_flat0(gen, n, m, rho, count, spread=1.0):
    """Unit mean-zero vectors with a flatness certificate at (m, spread * rho).

    A normalized projected m-sparse vector is perturbed by a mean-zero
    direction of norm uniform in [0, spread * rho] and renormalized.
    """
    U = []
    while len(U) < count:
        J = gen.choice(n, m, replace=False)
        v = np.zeros(n, complex)
        v[J] = _cgauss(gen, m)
        y = v - v.mean()
        y /= np.linalg.norm(y)
        e = _cgauss(gen, n)
        e -= e.mean()
        e *= spread * rho * gen.random() / np.linalg.norm(e)
        u = y + e
        u /= np.linalg.norm(u)
        if G.flatness_certificate(u, m, spread * rho).member:
            U.append(u)
    return np.array(U)


def net_point_defects(net):
    """Worst unit-norm, mean-zero and flatness defects over all net points."""
    P = net.points
    unit = float(np.abs(np.linalg.norm(P, axis=1) - 1).max())
    mean = float(np.abs(P.sum(axis=1)).max())
    off = np.ones(P.shape, dtype=bool)
    np.put_along_axis(off, net.supports, False, axis=1)
    cnt = off.sum(axis=1)
    lam = np.where(off, P, 0).sum(axis=1) / cnt
    flat = float(np.abs(np.where(off, P - lam[:, None], 0)).max())
    return unit, mean, flat


@criterion(19, "flat nets and bimodal sets")
def c19(ctx):
    st = ctx.stream(19)
    n, m, rho = 8, 2, 0.5
    net = G.build_flat_net(n, m, rho)
    unit, mean, flat = net_point_defects(net)
    U = random_flat0(st.child(0).generator(), n, m, rho, 1000)
    dist = net.distances(U)
    bound = net.cardinality_bound()
    net_ok = unit <= 1e-12 and mean <= 1e-12 and flat <= 1e-12 and dist.max() <= rho \
        and net.cardinality <= bound
    # bimodal sets
    gen = st.child(1).generator()
    nb = 64
    weak_v = strong_v = 0
    sizes = []
    done = 0
    while done < 100:
        x = _cgauss(gen, nb)
        u = G.UnitVector.from_array(x, project=True)
        try:
            J1, J2, J1p, info = G.bimodal_sets(u, m, rho)
        except G.IsFlat:
            continue
        done += 1
        c = u.components
        gap = np.abs(c[J1][:, None] - c[J2][None, :]).min() if J1.size and J2.size else -1.0
        weak_v += not gap >= rho / (2 * math.sqrt(nb))
        r = min(J1p.size, J2.size)
        sizes.append((J1.size, J2.size, J1p.size))
        if r == 0:
            strong_v += 1
            continue
        a = np.argsort(gen.random((1000, J1p.size)), axis=1)[:, :r]
        b = np.argsort(gen.random((1000, J2.size)), axis=1)[:, :r]
        diff = np.abs(c[J1p][a].mean(axis=1) - c[J2][b].mean(axis=1))
        strong_v += int(np.count_nonzero(~(diff >= rho / (4 * math.sqrt(nb)))))
    ok = net_ok and weak_v == 0 and strong_v == 0
    msg = (f"net |N| = {net.cardinality} <= {bound:.3g}, defects {max(unit, mean, flat):.1e}, "
           f"max cover distance {dist.max():.3f} (tol {rho}); bimodal violations weak {weak_v}, "
           f"strong {strong_v}")
    return ok, msg, {"cardinality": net.cardinality, "bound": bound, "max_distance": float(dist.max()),
                     "weak_violations": weak_v, "strong_violations": strong_v,
                     "min_sizes": np.min(np.array(sizes), axis=0).tolist()}


@criterion(20, "regular factors and rejection sampling")
def c20(ctx):
    st = ctx.stream(20)
    gen = st.child(0).generator()
    disagree = bad_cert = 0
    for _ in range(500):
        n = int(gen.integers(2, 11))
        d = int(gen.integers(1, n))
        p = gen.uniform(0.3, 1.0)
        B = (gen.random((n, n)) < p).astype(np.uint8)
        flow = find_regular_factor(B, d)
        ex = ore_ryser_exhaustive(B, d)
        disagree += flow.exists != ex.exists
        if flow.exists:
            F = flow.factor.dense
            bad_cert += bool(np.any(F > B))
        else:
            bad_cert += not flow.deficit > 0
    # rejection sampler acceptance rate
    g2 = st.child(1).generator()
    tries = 0
    hits = 400
    for _ in range(hits):
        _, t = rejection_sample(4, 2, rng=g2, return_tries=True)
        tries += t
    p0 = 90 * 2.0 ** -16
    rate = hits / tries
    sigma = math.sqrt(p0 * (1 - p0) / tries)
    rate_ok = abs(rate - p0) <= 3 * sigma
    fp = factor_probability(200, 0.3, 0.3, 100, st.child(2))
    fp_ok = fp.successes >= 99
    fp_wide = factor_probability(200, 0.3, 0.5, 100, st.child(3))
    ok = disagree == 0 and bad_cert == 0 and rate_ok and fp_ok
    msg = (f"{disagree} flow/exhaustive disagreements, {bad_cert} bad certificates; "
           f"acceptance rate {rate:.3e} vs {p0:.3e} ({abs(rate - p0) / sigma:.1f} sigma); "
           f"factor found in {fp.successes}/100 at (200, 0.3, 0.3) (need >= 99); "
           f"{fp_wide.successes}/100 at delta 0.5")
    return ok, msg, {"disagreements": disagree, "bad_certificates": bad_cert,
                     "acceptance_rate": rate, "tries": tries, "factor_successes": fp.successes,
                     "factor_d": fp.d,
                     "factor_successes_delta_0.5": fp_wide.successes}


def run_criterion(number, ctx=None) -> CriterionResult:
    title, level, binding, fn = CRITERIA[number]
    ctx = Context() if ctx is None else ctx
    t0 = time.perf_counter()
    passed, message, details = fn(ctx)
    return CriterionResult(number, title, bool(passed), binding, level,
                           time.perf_counter() - t0, message, details)


def run_suite(level="fast", seed=None, only=None):
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}")
    ctx = Context(seed)
    out = []
    for k in sorted(CRITERIA):
        if only and k not in only:
            continue
        if LEVELS[CRITERIA[k][1]] > LEVELS[level]:
            continue
        out.append(run_criterion(k, ctx))
    return out
