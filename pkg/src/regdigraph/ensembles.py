"""Reference ensembles, centering maps and ensemble comparison experiments.

Three n x n ensembles are used:

* regular: uniform A in A(n, d) (via the switch chain), centered as
  Y = (A - p 11^T) / sqrt(p(1-p)) with p = d/n;
* bernoulli: iid Bernoulli(p) B, centered the same way as X;
* gaussian: iid real standard normal G.

Every experiment draws sample k from child stream k of the given stream, so
results do not depend on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from .digraph import RegularDigraph, normalized
from .errors import BadFunctionSpec, BadP, BadParams, DegenerateScale, InvalidZ
from .rng import as_stream
from .sampler import chain_sample
from .spectral import (
    EmpiricalMeasure,
    circular_radial_cdf,
    eigenvalues,
    km_radial_cdf,
    ks_distance,
    perron_excluded,
    stieltjes_from_singular_values,
)

__all__ = [
    "EnsembleSpec",
    "ComparisonReport",
    "center_Y",
    "center_X",
    "bernoulli_matrix",
    "gaussian_matrix",
    "regular_samples",
    "shifted_svals",
    "interlacing_ks",
    "PiecewiseLinear",
    "tent",
    "compare_stieltjes",
    "compare_linear_stat",
    "wegner_profile",
    "ssv_tail",
    "validate_Z",
    "gaussian_order_stats",
    "uniform_integrability_probe",
    "circular_law_check",
    "kesten_mckay_check",
    "fit_power_law",
]


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    d: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("regular", "bernoulli", "gaussian"):
            raise BadParams(f"unknown ensemble {self.kind!r}")
        if self.kind == "regular" and not (1 <= self.d <= self.n / 2):
            raise BadParams("regular ensemble needs 1 <= d <= n/2")
        if self.kind == "bernoulli" and not (1 <= self.d <= self.n - 1):
            raise BadParams("bernoulli ensemble needs 1 <= d <= n-1")

    def sample(self, k):
        gen = as_stream(self.seed).child(k).generator()
        if self.kind == "regular":
            return chain_sample(self.n, self.d, rng=gen)
        if self.kind == "bernoulli":
            return bernoulli_matrix(self.n, self.d / self.n, gen)
        return gaussian_matrix(self.n, gen)


@dataclass
class ComparisonReport:
    statistic: str
    estimates: dict
    bound: float | None
    passed: bool | None
    details: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable(asdict(self))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.generic):
        return x.item()
    return x


def _mean_se(vals):
    a = np.asarray(vals)
    se = float(np.std(a, ddof=1) / math.sqrt(a.size)) if a.size > 1 else float("nan")
    m = a.mean()
    return {"mean": complex(m) if np.iscomplexobj(a) else float(m), "se": se, "count": int(a.size)}


# -- centering and raw ensembles ---------------------------------------------

def center_Y(A: RegularDigraph) -> np.ndarray:
    n, d = A.n, A.d
    if not 1 <= d <= n - 1:
        raise DegenerateScale(f"d={d} gives p(1-p)=0 for n={n}")
    p = d / n
    return (A.dense - p) / math.sqrt(p * (1 - p))


def center_X(B, p) -> np.ndarray:
    p = float(p)
    if not 0 < p < 1:
        raise BadP(f"p={p} outside (0, 1)")
    B = np.asarray(B, dtype=float)
    return (B - p) / math.sqrt(p * (1 - p))


def bernoulli_matrix(n, p, gen) -> np.ndarray:
    return (gen.random((n, n)) < p).astype(np.float64)


def gaussian_matrix(n, gen) -> np.ndarray:
    return gen.standard_normal((n, n))


def regular_samples(n, d, samples, rng=None, steps=None):
    """Yield ``samples`` chain samples from A(n, d), sample k from child stream k."""
    st = as_stream(rng)
    for k in range(samples):
        yield chain_sample(n, d, steps=steps, rng=st.child(k).generator())


def shifted_svals(M, z, scale=1.0) -> np.ndarray:
    """Singular values of scale * M - z, in decreasing order."""
    B = np.asarray(M) * scale
    z = complex(z)
    if z != 0:
        shift = z.real if z.imag == 0 else z
        B = B - shift * np.eye(B.shape[0])
    return sla.svdvals(B)


def interlacing_ks(A: RegularDigraph, z, rtol=1e-9, svals=None) -> float:
    """KS distance between nu(Y/sqrt(n) - z) and nu(Abar - z).

    The two matrices agree on the mean-zero subspace, so n - 1 singular
    values coincide exactly; ties are resolved with a relative tolerance.
    ``svals`` may pass precomputed (s_y, s_abar).
    """
    n = A.n
    if svals is None:
        s_y = shifted_svals(center_Y(A), z, 1 / math.sqrt(n))
        s_a = shifted_svals(normalized(A), z)
    else:
        s_y, s_a = svals
    tol = rtol * max(float(np.max(s_y)), float(np.max(s_a)), 1.0)
    return ks_distance(EmpiricalMeasure(s_y), EmpiricalMeasure(s_a), tol=tol)


def fit_power_law(x, y, exponent=None):
    """Least-squares fit of log y = log C + a log x; with ``exponent`` fixed, fit C only.

    Returns (C, a, max_ratio) where max_ratio is the worst multiplicative
    deviation of the data from the fit.
    """
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if exponent is None:
        a, c = np.polyfit(lx, ly, 1)
    else:
        a = float(exponent)
        c = float(np.mean(ly - a * lx))
    resid = ly - (c + a * lx)
    return float(math.exp(c)), float(a), float(math.exp(np.abs(resid).max()))


# -- Stieltjes comparison ------------------------------------------------------

def _g_of(M, z, w):
    n = M.shape[0]
    return stieltjes_from_singular_values(shifted_svals(M, z, 1 / math.sqrt(n)), w)


def compare_stieltjes(n, d, z, w, samples, rng=None, ensembles=("bernoulli", "gaussian")):
    """MC estimate of |E g_{z,w}(X) - E g_{z,w}(G)|.

    The bound scale d^{-1/2} (Im w)^{-4} (1 + (n Im w)^{-2}) is reported with
    the fitted constant C = difference / scale.
    """
    w = complex(w)
    if not w.imag > 0:
        raise BadParams("w must lie in the upper half plane")
    if samples < 2:
        raise BadParams("need at least two samples")
    st = as_stream(rng)
    p = d / n
    vals = {}
    for e_idx, kind in enumerate(ensembles):
        gs = []
        for k in range(samples):
            gen = st.child(e_idx).child(k).generator()
            if kind == "bernoulli":
                M = center_X(bernoulli_matrix(n, p, gen), p)
            elif kind == "gaussian":
                M = gaussian_matrix(n, gen)
            else:
                M = center_Y(chain_sample(n, d, rng=gen))
            gs.append(_g_of(M, z, w))
        vals[kind] = np.array(gs)
    a, b = (vals[k] for k in ensembles)
    diff = abs(a.mean() - b.mean())
    se = math.sqrt(np.var(a, ddof=1) / a.size + np.var(b, ddof=1) / b.size)
    scale = d ** -0.5 * w.imag ** -4 * (1 + (n * w.imag) ** -2)
    return ComparisonReport(
        "stieltjes",
        {k: _mean_se(v) for k, v in vals.items()},
        scale,
        None,
        {"difference": float(diff), "difference_se": float(se), "fitted_C": float(diff / scale)},
        {"n": n, "d": d, "z": complex(z), "w": w, "samples": samples, "seed": st.master_seed},
    )


# -- linear statistics -------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseLinear:
    """Compactly supported piecewise-linear function through (xs, ys)."""

    xs: tuple
    ys: tuple
    lipschitz: float

    def __post_init__(self):
        xs, ys = np.asarray(self.xs, float), np.asarray(self.ys, float)
        if xs.size < 2 or xs.shape != ys.shape or np.any(np.diff(xs) <= 0):
            raise BadFunctionSpec("knots must be strictly increasing, one value each")
        if ys[0] != 0 or ys[-1] != 0:
            raise BadFunctionSpec("function must vanish at both ends of its support")
        slope = np.abs(np.diff(ys) / np.diff(xs)).max()
        if slope > self.lipschitz * (1 + 1e-12):
            raise BadFunctionSpec(f"declared Lipschitz constant {self.lipschitz} < slope {slope}")

    @property
    def support(self):
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, t):
        return np.interp(np.asarray(t, float), self.xs, self.ys, left=0.0, right=0.0)


def tent(height=1.0, a=-2.0, b=2.0) -> PiecewiseLinear:
    m = (a + b) / 2
    return PiecewiseLinear((a, m, b), (0.0, height, 0.0), 2 * abs(height) / (b - a))


def _hermitized_integral(f, s):
    return float((np.sum(f(s)) + np.sum(f(-s))) / (2 * s.size))


def compare_linear_stat(n, d, z, f, samples, rng=None, bern_samples=None, tol=0.02):
    """Integral of f against the ESD of H_z(Y) per regular sample vs the Bernoulli mean."""
    if not isinstance(f, PiecewiseLinear):
        raise BadFunctionSpec("f must be a PiecewiseLinear spec")
    st = as_stream(rng)
    p = d / n
    bern_samples = samples if bern_samples is None else bern_samples
    reg = []
    for k, A in enumerate(regular_samples(n, d, samples, st.child(0))):
        reg.append(_hermitized_integral(f, shifted_svals(center_Y(A), z, 1 / math.sqrt(n))))
    bern = []
    for k in range(bern_samples):
        gen = st.child(1).child(k).generator()
        X = center_X(bernoulli_matrix(n, p, gen), p)
        bern.append(_hermitized_integral(f, shifted_svals(X, z, 1 / math.sqrt(n))))
    reg, bern = np.array(reg), np.array(bern)
    dev = np.abs(reg - bern.mean())
    frac = float(np.mean(dev <= tol))
    return ComparisonReport(
        "linear-statistic",
        {"regular": _mean_se(reg), "bernoulli": _mean_se(bern)},
        tol,
        frac >= 0.95,
        {"deviation_quantiles": np.quantile(dev, [0.5, 0.9, 0.95, 1.0]).tolist(),
         "fraction_within_tol": frac, "per_sample": reg.tolist()},
        {"n": n, "d": d, "z": complex(z), "samples": samples, "seed": st.master_seed},
    )


# -- Wegner profile --------------------------------------------------------------

def wegner_profile(n, d, z, etas, samples, rng=None, C=10.0, svals=None):
    """nu_{Y/sqrt(n) - z}([0, eta]) per regular sample against C (eta + d^{-1/48}).

    ``svals`` may supply precomputed singular values (one array per sample).
    """
    etas = np.asarray(etas, float)
    if np.any(etas <= 0) or np.any(etas > 1):
        raise BadParams("etas must lie in (0, 1]")
    if svals is None:
        svals = [shifted_svals(center_Y(A), z, 1 / math.sqrt(n))
                 for A in regular_samples(n, d, samples, rng)]
    prof = np.array([[np.mean(s <= e) for e in etas] for s in svals])
    bound = C * (etas + d ** (-1 / 48))
    ok = np.all(prof <= bound[None, :], axis=1)
    fitted = float((prof / (etas + d ** (-1 / 48))[None, :]).max())
    frac = float(ok.mean())
    return ComparisonReport(
        "wegner",
        {"profile_mean": prof.mean(axis=0).tolist()},
        float(C),
        frac >= 0.95,
        {"fraction_ok": frac, "fitted_C": fitted, "etas": etas.tolist(),
         "zero_fraction": float(np.mean([np.mean(s == 0) for s in svals]))},
        {"n": n, "d": d, "z": complex(z), "samples": len(svals)},
    )


# -- smallest singular value ---------------------------------------------------

def validate_Z(Z, d, gamma=1.0, tol=1e-9):
    """Check the structural hypotheses on a perturbation Z; returns zeta."""
    Z = np.asarray(Z, dtype=complex)
    n = Z.shape[0]
    rows = Z.sum(axis=1)
    zeta = rows[0]
    if np.abs(rows - zeta).max() > tol * max(1.0, abs(zeta)):
        raise InvalidZ("Z1 = zeta 1", "(row sums differ)")
    cols = Z.sum(axis=0)
    if np.abs(cols - zeta).max() > tol * max(1.0, abs(zeta)):
        raise InvalidZ("Z*1 = conj(zeta) 1", "(column sums differ)")
    P = np.eye(n) - np.full((n, n), 1.0 / n)
    if np.linalg.norm(Z @ P, 2) > n ** gamma:
        raise InvalidZ("||Z|| on the mean-zero subspace <= n^gamma")
    if abs(d + zeta) < n ** -10.0:
        raise InvalidZ("|d + zeta| >= n^-10")
    return complex(zeta)


def ssv_tail(n, d, z, zmode="scalar-shift", samples=10, rng=None, Z=None, gamma=1.0,
             gammas=(1, 2, 4)):
    """Empirical lower tail of s_n(A + Z) over regular samples.

    ``scalar-shift`` takes Z = -z sqrt(d(1 - d/n)) I so that
    s_n(A + Z) = sqrt(d(1-d/n)) s_n(Abar - z). ``custom-Z`` uses ``Z``
    after validating its hypotheses. s_n(A) itself is recorded too.
    """
    scale = math.sqrt(d * (1 - d / n))
    if zmode == "scalar-shift":
        Zm = -complex(z) * scale * np.eye(n)
    elif zmode == "custom-Z":
        if Z is None:
            raise InvalidZ("custom-Z needs a matrix")
        validate_Z(Z, d, gamma)
        Zm = np.asarray(Z, dtype=complex)
    else:
        raise BadParams(f"unknown zmode {zmode!r}")
    sn_shift, sn_plain = [], []
    for A in regular_samples(n, d, samples, rng):
        M = A.dense.astype(float)
        sn_plain.append(float(sla.svdvals(M)[-1]))
        sn_shift.append(float(sla.svdvals(M + Zm)[-1]))
    sn_shift, sn_plain = np.array(sn_shift), np.array(sn_plain)
    fr = {g: float(np.mean(sn_shift < n ** -float(g))) for g in gammas}
    return ComparisonReport(
        "ssv",
        {"s_n(A+Z)": _mean_se(sn_shift), "s_n(A)": _mean_se(sn_plain)},
        None,
        None,
        {"fraction_below": fr, "min_shifted": float(sn_shift.min()),
         "min_shifted_normalized": float(sn_shift.min() / scale),
         "min_plain": float(sn_plain.min()),
         "singular_fraction": float(np.mean(sn_plain <= 1e-10)),
         "per_sample": sn_shift.tolist()},
        {"n": n, "d": d, "z": complex(z), "zmode": zmode, "samples": samples},
    )


# -- Gaussian order statistics -------------------------------------------------

def gaussian_order_stats(n, M=None, k=None, samples=10, rng=None, c=0.01):
    """Check s_{n-j}(G/sqrt(n) + M) >= c j/n for k <= j <= n-1."""
    k = int(math.ceil(math.sqrt(n))) if k is None else int(k)
    if k < 1:
        raise BadParams("k must be at least 1")
    M = np.zeros((n, n)) if M is None else np.asarray(M)
    st = as_stream(rng)
    j = np.arange(k, n)
    viol = 0
    fitted = []
    for t in range(samples):
        G = gaussian_matrix(n, st.child(t).generator())
        s = sla.svdvals(G / math.sqrt(n) + M)  # s[0] = s_1
        snj = s[n - j - 1]
        viol += int(np.count_nonzero(snj < c * j / n))
        fitted.append(float((snj * n / j).min()))
    fitted = np.array(fitted)
    c_pass = float(np.quantile(fitted, 1 / samples)) if samples > 1 else float(fitted[0])
    return ComparisonReport(
        "gaussian-order-statistics",
        {"fitted_c": _mean_se(fitted)},
        c,
        viol == 0,
        {"violations": viol, "largest_c_passing": c_pass, "per_sample_c": fitted.tolist()},
        {"n": n, "k": k, "samples": samples},
    )


# -- uniform integrability -----------------------------------------------------

def uniform_integrability_probe(n, d, z, T=(5.0,), eps=(0.1,), samples=10, rng=None,
                                svals=None):
    """Tail integrals of |log s| against nu(Abar - z) and second moments."""
    if svals is None:
        svals = [shifted_svals(normalized(A), z) for A in regular_samples(n, d, samples, rng)]
    Ts = np.atleast_1d(np.asarray(T, float))
    if np.any(Ts <= 0):
        raise BadParams("T must be positive")
    es = np.atleast_1d(np.asarray(eps, float))
    tails = []
    second = []
    for s in svals:
        with np.errstate(divide="ignore"):
            ls = np.abs(np.log(s))
        tails.append([float(np.sum(np.where(ls > t, ls, 0.0)) / s.size) for t in Ts])
        second.append(float(np.mean(s * s)))
    tails = np.array(tails)
    exceed = {f"T={t},eps={e}": float(np.mean(tails[:, a] > e))
              for a, t in enumerate(Ts) for e in es}
    second = np.array(second)
    ceiling = 4 * (1 + abs(complex(z)) ** 2)
    return ComparisonReport(
        "uniform-integrability",
        {"second_moment": _mean_se(second)},
        ceiling,
        bool(np.all(second <= ceiling)),
        {"exceedance": exceed, "tail_integrals": tails.tolist(),
         "max_second_moment": float(second.max())},
        {"n": n, "d": d, "z": complex(z), "samples": len(svals)},
    )


# -- eigenvalue laws -------------------------------------------------------------

def circular_law_check(A: RegularDigraph):
    """Radial and angular KS of the Perron-excluded ESD of Abar against the unit disk."""
    ev = perron_excluded(eigenvalues(normalized(A)))
    mu = EmpiricalMeasure(ev)
    radial = ks_distance(mu.radial(), circular_radial_cdf)
    angular = ks_distance(mu.angular(), lambda t: np.clip(t, 0, 1))
    return {"radial_ks": radial, "angular_ks": angular, "eigenvalues": ev}


def kesten_mckay_check(As):
    """Radial KS of the pooled Perron-excluded eigenvalues of A against the oriented law."""
    As = list(As)
    d = As[0].d
    evs = [perron_excluded(eigenvalues(A.dense)) for A in As]
    mu = EmpiricalMeasure(np.concatenate(evs))
    per = [ks_distance(EmpiricalMeasure(e).radial(), lambda r: km_radial_cdf(r, d)) for e in evs]
    pooled = ks_distance(mu.radial(), lambda r: km_radial_cdf(r, d))
    return {"pooled_ks": pooled, "per_sample_ks": per}
