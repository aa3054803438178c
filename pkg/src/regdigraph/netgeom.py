"""Geometry of flat vectors: concentration function, nets, bimodal sets.

Conventions: for v in C^n, the Levy set E_v(lam, rho) collects indices j
with |v_j - lam/sqrt(n)| < rho/sqrt(n), and Q_v(rho) is the largest
fraction of coordinates in such a set. A unit vector is (m, rho)-flat when
it lies within rho of (m-sparse vector) + (constant vector).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
from scipy import stats

from .errors import BadParams, IsFlat, TooLarge, ZeroVector
from .rng import as_generator

__all__ = [
    "UnitVector",
    "levy_set",
    "concentration_function",
    "FlatnessCertificate",
    "flat_residual",
    "flatness_certificate",
    "FlatNet",
    "build_flat_net",
    "bimodal_sets",
    "small_ball_mc",
    "small_ball_exact",
    "tensorization_check",
    "DOUBLING_C",
    "SECTORS",
    "C_NET",
]

DOUBLING_C = 1 / 7  # a disk is covered by 7 disks of half the radius
SECTORS = 16
C_NET = 700
EPS_OPEN = 1e-12


@dataclass(frozen=True)
class UnitVector:
    components: np.ndarray
    norm_tag: str = "unit"
    mean_zero: bool = False

    def __post_init__(self):
        c = np.asarray(self.components, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "components", c)
        if self.norm_tag == "unit" and abs(np.linalg.norm(c) - 1) > 1e-12:
            raise BadParams("unit-tagged vector does not have norm 1")
        if self.mean_zero and abs(c.sum()) > 1e-12:
            raise BadParams("mean-zero-tagged vector has nonzero sum")

    @classmethod
    def from_array(cls, x, project=False):
        """Normalize ``x`` (after removing its mean if ``project``)."""
        x = np.asarray(x, dtype=complex).ravel()
        if project:
            x = x - x.mean()
        nrm = np.linalg.norm(x)
        if nrm == 0:
            raise ZeroVector("cannot normalize the zero vector")
        x = x / nrm
        mz = bool(abs(x.sum()) <= 1e-12)
        if project and not mz:
            x = x - x.mean()
            x = x / np.linalg.norm(x)
            mz = bool(abs(x.sum()) <= 1e-12)
        return cls(x, "unit", mz)

    @property
    def n(self):
        return self.components.size

    def __len__(self):
        return self.components.size


def _vec(v):
    if isinstance(v, UnitVector):
        return v.components
    return np.asarray(v, dtype=complex).ravel()


def levy_set(v, lam, rho) -> np.ndarray:
    x = _vec(v)
    n = x.size
    if not rho > 0:
        raise BadParams("rho must be positive")
    s = math.sqrt(n)
    return np.flatnonzero(np.abs(x - complex(lam) / s) < rho / s)


def _best_disk(x, r, exact=True, tol=1e-13):
    """Max number of points of x within closed distance r of some center.

    Returns (count, center). An optimal disk can be moved until some point
    sits on its boundary, so exact mode sweeps, for each point a, the circle
    of centers at distance r from a and records which neighbors each arc
    covers. Fast mode only tries the points themselves as centers.
    """
    n = x.size
    best, center = 1, x[0]
    order = np.argsort(x.real, kind="stable")
    xs = x[order]
    re = xs.real
    two_pi = 2 * math.pi
    for a in range(n):
        lo = np.searchsorted(re, re[a] - 2 * r - tol, side="left")
        hi = np.searchsorted(re, re[a] + 2 * r + tol, side="right")
        diff = xs[lo:hi] - xs[a]
        D = np.abs(diff)
        near = D <= 2 * r + tol
        if np.count_nonzero(near) <= best:
            continue
        if not exact:
            cnt = int(np.count_nonzero(D <= r + tol))
            if cnt > best:
                best, center = cnt, xs[a]
            continue
        same = D[near] == 0
        base = int(np.count_nonzero(same))  # includes a itself
        dn = diff[near][~same]
        Dn = D[near][~same]
        if dn.size == 0:
            if base > best:
                best, center = base, xs[a]
            continue
        theta = np.angle(dn)
        alpha = np.arccos(np.minimum(Dn / (2 * r), 1.0))
        start = np.mod(theta - alpha, two_pi)
        end = start + 2 * alpha
        pos = np.concatenate([start, start + two_pi, end, end + two_pi])
        kind = np.concatenate([np.ones(2 * start.size), -np.ones(2 * start.size)])
        idx = np.lexsort((-kind, pos))
        run = np.cumsum(kind[idx])
        k = int(np.argmax(run))
        cnt = base + int(run[k])
        if cnt > best:
            best = cnt
            center = xs[a] + r * np.exp(1j * pos[idx][k])
    return best, center


def concentration_function(v, rho, mode="exact", return_center=False, max_n=2000):
    """Q_v(rho) = max_lam |E_v(lam, rho)| / n.

    ``exact`` finds the closed-disk optimum at radius rho - 1e-12 (so it
    respects the strict inequality) using point and circle-intersection
    centers; ``fast`` only tries point centers and gives a lower bound.
    With ``return_center`` the optimal lam (in the E_v parametrization)
    is returned too.
    """
    x = _vec(v)
    n = x.size
    if not rho > 0:
        raise BadParams("rho must be positive")
    if mode == "exact" and n > max_n:
        raise TooLarge(f"exact concentration function capped at n <= {max_n}")
    if mode not in ("exact", "fast"):
        raise ValueError(f"unknown mode {mode!r}")
    s = math.sqrt(n)
    scale = max(1.0, rho)
    r = rho - EPS_OPEN * scale
    cnt, c = _best_disk(x * s, r, exact=(mode == "exact"), tol=0.1 * EPS_OPEN * scale)
    # the reported center must realize the count under the strict definition
    lam = complex(c)
    cnt = max(int(np.count_nonzero(np.abs(x * s - lam) < rho)), 1)
    q = cnt / n
    return (q, lam) if return_center else q


# -- flatness ----------------------------------------------------------------

@dataclass
class FlatnessCertificate:
    member: bool
    lam: complex
    support: np.ndarray
    residual: float
    method: str

    def recompute(self, u) -> float:
        """||u - v - lam 1|| with v = (u - lam 1) restricted to the support."""
        x = _vec(u)
        r = x - self.lam
        r[np.asarray(self.support, dtype=np.int64)] = 0
        return float(np.linalg.norm(r))


def flat_residual(u, lam, m):
    """Best residual and support for a fixed constant ``lam``."""
    x = _vec(u)
    dev = np.abs(x - lam) ** 2
    if m <= 0:
        return float(np.sqrt(dev.sum())), np.empty(0, dtype=np.int64)
    idx = np.argsort(-dev, kind="stable")[:m]
    keep = np.ones(x.size, dtype=bool)
    keep[idx] = False
    return float(np.sqrt(dev[keep].sum())), np.sort(idx)


def _alternate(x, lam, m, iters=50):
    res, sup = flat_residual(x, lam, m)
    for _ in range(iters):
        mask = np.ones(x.size, dtype=bool)
        mask[sup] = False
        new_lam = x[mask].mean() if mask.any() else lam
        new_res, new_sup = flat_residual(x, new_lam, m)
        if new_res >= res - 1e-15:
            break
        lam, res, sup = new_lam, new_res, new_sup
    return res, lam, sup


def flatness_certificate(u, m, rho) -> FlatnessCertificate:
    """One-sided search for a flat decomposition of ``u``.

    Tries alternating minimization from every lam in {u_j} and 0, and the
    concentration route (Q_u(rho) >= 1 - m/n gives a decomposition directly).
    ``member=False`` means no certificate was found.
    """
    x = _vec(u)
    n = x.size
    m = int(m)
    if not (1 <= m < n) or not rho > 0:
        raise BadParams("need 1 <= m < n and rho > 0")
    best = (math.inf, 0j, np.empty(0, dtype=np.int64))
    for lam0 in np.concatenate([[0j], x]):
        res, lam, sup = _alternate(x, lam0, m)
        if res < best[0]:
            best = (res, lam, sup)
    res, lam, sup = best
    if res <= rho:
        return FlatnessCertificate(True, complex(lam), sup, res, "alternating")
    if n <= 2000:
        q, c = concentration_function(x, rho, return_center=True)
        if q >= 1 - m / n:
            lam_c = c / math.sqrt(n)
            E = levy_set(x, c, rho)
            support = np.setdiff1d(np.arange(n), E)
            cert = FlatnessCertificate(True, complex(lam_c), support, 0.0, "concentration-implied")
            cert.residual = cert.recompute(x)
            return cert
    return FlatnessCertificate(False, complex(lam), sup, res, "alternating")


# -- nets ----------------------------------------------------------------------

@dataclass
class FlatNet:
    """Unit mean-zero vectors, each a normalized projection of an m-sparse vector.

    ``points`` has shape (cardinality, n); ``supports[k]`` is the sparse
    support that generated ``points[k]``.
    """

    n: int
    m: int
    rho: float
    points: np.ndarray
    supports: np.ndarray
    spacing: float
    covering_radius: float
    stats: dict = field(default_factory=dict)

    @property
    def cardinality(self) -> int:
        return int(self.points.shape[0])

    def cardinality_bound(self, c_net=C_NET) -> float:
        return (c_net * self.n / (self.m * self.rho ** 2)) ** self.m

    def certificate(self, k) -> FlatnessCertificate:
        """Zero-residual certificate for net point ``k``."""
        p = self.points[k]
        sup = self.supports[k]
        off = np.setdiff1d(np.arange(self.n), sup)
        lam = complex(p[off].mean()) if off.size else 0j
        cert = FlatnessCertificate(True, lam, sup, 0.0, "net-witness")
        cert.residual = cert.recompute(p)
        return cert

    def distances(self, U, chunk=1 << 16) -> np.ndarray:
        """Distance from each row of U (unit vectors) to the nearest net point."""
        U = np.atleast_2d(np.asarray(U, dtype=complex))
        best = np.full(U.shape[0], -np.inf)
        for s in range(0, self.cardinality, chunk):
            G = self.points[s:s + chunk].conj() @ U.T
            best = np.maximum(best, G.real.max(axis=0))
        un = np.linalg.norm(U, axis=1) ** 2
        return np.sqrt(np.maximum(un + 1 - 2 * best, 0.0))


def _net_plan(n, m, rho):
    """Grid spacing, box half-width and grid size per support."""
    r = rho / 4
    h = 2 * r / math.sqrt(2 * m)
    box = 1 / math.sqrt(1 - m / n) + h / 2
    k = int(math.floor(box / h))
    return r, h, k


def build_flat_net(n, m, rho, cap=5 * 10**7) -> FlatNet:
    """Net of normalized projections of m-sparse vectors.

    For each support J, take the cubic grid of spacing h in C^J (covering
    radius rho/4), keep points whose projection onto the mean-zero subspace
    has norm within rho/4 of 1, project and normalize. Every unit vector of
    the projected subspace is then within about rho/4 of the net.
    """
    n, m = int(n), int(m)
    if not (1 <= m < n) or not 0 < rho < 1:
        raise BadParams("need 1 <= m < n and 0 < rho < 1")
    r, h, k = _net_plan(n, m, rho)
    per = (2 * k + 1) ** (2 * m)
    est = math.comb(n, m) * per
    if est > cap:
        raise TooLarge(f"net would scan {est} grid points (cap {cap})")
    axis = h * np.arange(-k, k + 1)
    grid = np.array(list(product(axis, repeat=2 * m)))
    g = grid[:, :m] + 1j * grid[:, m:]
    s = g.sum(axis=1)
    pnorm = np.sqrt(np.maximum((np.abs(g) ** 2).sum(axis=1) - np.abs(s) ** 2 / n, 0))
    keep = np.abs(pnorm - 1) <= r
    g, s, pnorm = g[keep], s[keep], pnorm[keep]
    pts, sups = [], []
    for J in combinations(range(n), m):
        P = np.empty((g.shape[0], n), dtype=complex)
        P[:] = (-s / n)[:, None]
        P[:, list(J)] += g
        P /= pnorm[:, None]
        pts.append(P)
        sups.append(np.broadcast_to(np.array(J), (g.shape[0], m)))
    points = np.concatenate(pts)
    supports = np.concatenate(sups)
    key = np.round(np.concatenate([points.real, points.imag], axis=1), 12)
    _, first = np.unique(key, axis=0, return_index=True)
    first.sort()
    points, supports = points[first], supports[first]
    points.setflags(write=False)
    return FlatNet(n, m, float(rho), points, np.ascontiguousarray(supports), h, r,
                   {"grid_per_support": per, "kept_per_support": int(keep.sum())})


# -- bimodal decomposition ---------------------------------------------------

def bimodal_sets(u, m, rho, check_flat=True):
    """Two separated index sets for a non-flat unit vector.

    Radii are dyadic multiples of rho: R = rho 2^-k0 where k0 is the least
    integer with Q_u(R) < 1 - m/n (so R >= rho). With lam0 optimal for
    Q_u(R/2): J1 = E_u(lam0, R)^c, J2 = E_u(lam0, R/2), and J1' is the part
    of J1 in the fullest of 16 angular sectors around lam0/sqrt(n).

    Returns ``(J1, J2, J1_prime, info)``.
    """
    x = _vec(u)
    n = x.size
    m = int(m)
    thr = 1 - m / n
    if check_flat:
        cert = flatness_certificate(x, m, rho)
        if cert.member:
            raise IsFlat(f"vector is ({m}, {rho})-flat (method {cert.method})")
    q0 = concentration_function(x, rho)
    if q0 >= thr:
        raise IsFlat("concentration function forces flatness")
    k0 = 0
    while concentration_function(x, rho * 2.0 ** -(k0 - 1)) < thr:
        k0 -= 1
    R = rho * 2.0 ** -k0
    _, lam0 = concentration_function(x, R / 2, return_center=True)
    J1 = np.setdiff1d(np.arange(n), levy_set(x, lam0, R))
    J2 = levy_set(x, lam0, R / 2)
    c0 = lam0 / math.sqrt(n)
    ang = np.mod(np.angle(x[J1] - c0), 2 * math.pi)
    sector = np.minimum((ang / (2 * math.pi / SECTORS)).astype(np.int64), SECTORS - 1)
    counts = np.bincount(sector, minlength=SECTORS)
    best = int(np.argmax(counts))
    J1p = J1[sector == best]
    theta = (best + 0.5) * 2 * math.pi / SECTORS
    info = {
        "k0": k0,
        "radius": R,
        "lam0": lam0,
        "direction": theta,
        "ratio_J1": J1.size / max(m, 1),
        "ratio_J2": J2.size / (n - m),
        "ratio_J1p": J1p.size / max(m, 1),
    }
    return J1, J2, J1p, info


# -- small-ball and tensorization harnesses ---------------------------------

@dataclass
class SmallBallReport:
    estimate: float
    stderr: float
    bound_unit: float
    fitted_C: float
    trials: int


def small_ball_exact(v, r, center=0.0) -> float:
    """P(|center + sum xi_j v_j| <= r) by exhausting sign patterns (len <= 20)."""
    v = np.asarray(v, dtype=complex).ravel()
    if v.size > 20:
        raise TooLarge("exact small-ball probability capped at 20 steps")
    signs = np.array(list(product((-1.0, 1.0), repeat=v.size)))
    s = complex(center) + signs @ v
    return float(np.mean(np.abs(s) <= r))


def small_ball_mc(v, r, center=0.0, trials=10**4, rng=None, batch=4096) -> SmallBallReport:
    """Monte Carlo P(|center + sum xi_j v_j| <= r) for Rademacher xi.

    ``bound_unit`` is (r + ||v||_inf)/||v||, the small-ball scale; the
    fitted constant is estimate / bound_unit.
    """
    v = np.asarray(v, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ZeroVector("step vector is zero")
    trials = int(trials)
    if trials < 1:
        raise BadParams("trials must be positive")
    gen = as_generator(rng)
    hits = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        xi = gen.integers(0, 2, size=(b, v.size)) * 2.0 - 1.0
        s = complex(center) + xi @ v
        hits += int(np.count_nonzero(np.abs(s) <= r))
        done += b
    est = hits / trials
    unit = (r + np.abs(v).max()) / nrm
    return SmallBallReport(est, math.sqrt(est * (1 - est) / trials), float(unit),
                           est / unit, trials)


@dataclass
class TensorizationReport:
    rows: list
    slope: float | None
    params: dict


def _tensor_exact(n, p0, eps0, c1, low, high):
    # k coordinates take the high value
    k = np.arange(n + 1)
    ok = k * high ** 2 + (n - k) * low ** 2 <= c1 * eps0 ** 2 * n
    pmf = stats.binom.pmf(k, n, 1 - p0)
    return float(pmf[ok].sum())


def tensorization_check(p0, eps0, n, trials=10**4, rng=None, c1=0.25, low=0.0, high=None):
    """Two-point harness: zeta_j = low w.p. p0 else high, with low <= eps0 < high.

    Estimates P(sum zeta_j^2 <= c1 eps0^2 n) for each n (an int or a
    sequence) alongside the exact binomial value, and fits the log-linear
    decay slope in n over the positive exact values.
    """
    p0 = float(p0)
    if not 0 <= p0 < 1 or not eps0 > 0:
        raise BadParams("need 0 <= p0 < 1 and eps0 > 0")
    high = 2 * eps0 if high is None else float(high)
    if not (0 <= low <= eps0 < high):
        raise BadParams("two-point law must satisfy low <= eps0 < high")
    ns = [int(n)] if np.isscalar(n) else [int(k) for k in n]
    gen = as_generator(rng)
    rows = []
    for nn in ns:
        hits = 0
        per = max(1, (1 << 22) // nn)
        for s in range(0, int(trials), per):
            b = min(per, int(trials) - s)
            zeta = np.where(gen.random((b, nn)) < p0, low, high)
            hits += int(np.count_nonzero((zeta ** 2).sum(axis=1) <= c1 * eps0 ** 2 * nn))
        est = hits / int(trials)
        exact = _tensor_exact(nn, p0, eps0, c1, low, high)
        se = math.sqrt(max(exact * (1 - exact), 1e-300) / trials)
        rows.append({"n": nn, "estimate": est, "exact": exact, "stderr": se})
    pos = [(r["n"], math.log(r["exact"])) for r in rows if r["exact"] > 0]
    slope = None
    if len(pos) >= 2:
        a = np.array(pos)
        slope = float(np.polyfit(a[:, 0], a[:, 1], 1)[0])
    return TensorizationReport(rows, slope,
                               {"p0": p0, "eps0": eps0, "c1": c1, "low": low, "high": high,
                                "trials": int(trials)})
