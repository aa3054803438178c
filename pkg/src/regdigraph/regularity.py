"""Checkers for codegree, discrepancy and expansion properties.

Each checker returns a :class:`RegularityReport`. A verdict is
``certified-*`` only when every set in the property's quantifier was
examined; otherwise it is ``sampled-*`` and only covers the random sets
that were drawn. Failing reports always carry a witness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .digraph import RegularDigraph
from .errors import BadParams, PrerequisiteMissing
from .rng import as_generator

__all__ = [
    "RegularityReport",
    "codegree_matrix",
    "codegree_tail_bound",
    "check_codegree",
    "check_discrepancy",
    "discrepancy_n0",
    "check_expansion",
    "verify_expansion_consequences",
    "expansion_holds_masks",
    "expansion_consequence_violations_masks",
]

CERT_PASS = "certified-pass"
CERT_FAIL = "certified-fail"
SAMP_PASS = "sampled-pass"
SAMP_FAIL = "sampled-fail"


@dataclass
class RegularityReport:
    property: str
    parameters: dict
    verdict: str
    witness: object = None
    trials: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict.endswith("pass")

    @property
    def certified(self) -> bool:
        return self.verdict.startswith("certified")

    def to_dict(self) -> dict:
        w = self.witness
        if w is not None:
            w = _one_based(w)
        return {
            "property": self.property,
            "parameters": self.parameters,
            "verdict": self.verdict,
            "witness": w,
            "trials": self.trials,
            "stats": self.stats,
        }


def _one_based(w):
    if isinstance(w, (int, np.integer)):
        return int(w) + 1
    if isinstance(w, dict):
        return {k: _one_based(v) if k in ("pair", "I", "J") else v for k, v in w.items()}
    return [_one_based(x) for x in w]


def _verdict(ok, exhaustive):
    if exhaustive:
        return CERT_PASS if ok else CERT_FAIL
    return SAMP_PASS if ok else SAMP_FAIL


# -- codegree ---------------------------------------------------------------

def codegree_matrix(A: RegularDigraph) -> np.ndarray:
    M = A.dense.astype(np.int32)
    C = M @ M.T
    np.fill_diagonal(C, -1)
    return C


def codegree_tail_bound(n, d, K) -> float:
    """Upper bound on P(codeg(i1, i2) >= (1 + K) d^2 / n) for a fixed pair."""
    return math.exp(-K * K / (4 + 2 * K) * d * d / n)


def check_codegree(A: RegularDigraph, K=1.0) -> RegularityReport:
    """Certify max codegree <= d/4 over all pairs.

    The report's stats include the maximum, the number of pairs above the
    tail level (1 + K) d^2 / n and the per-pair tail bound at that level.
    """
    n, d = A.n, A.d
    if n < 2:
        return RegularityReport("codegree", {"K": K}, CERT_PASS, None, 0, {"max": 0})
    C = codegree_matrix(A)
    iu = np.triu_indices(n, 1)
    vals = C[iu]
    k = int(np.argmax(vals))
    mx = int(vals[k])
    pair = (int(iu[0][k]), int(iu[1][k]))
    level = (1 + K) * d * d / n
    stats = {
        "max": mx,
        "argmax": [pair[0] + 1, pair[1] + 1],
        "threshold": d / 4,
        "tail_level": level,
        "tail_count": int(np.count_nonzero(vals >= level)),
        "pairs": int(vals.size),
        "tail_bound": codegree_tail_bound(n, d, K),
    }
    ok = mx <= d / 4
    return RegularityReport(
        "codegree", {"K": K}, CERT_PASS if ok else CERT_FAIL,
        None if ok else pair, int(vals.size), stats,
    )


# -- discrepancy ------------------------------------------------------------

def discrepancy_n0(n, d, delta, C=8.0) -> int:
    return int(math.ceil(C * n / (delta * math.sqrt(d))))


def _all_subsets(n, min_size):
    """Indicator rows of every subset of [n] with more than ``min_size`` elements."""
    masks = np.arange(1 << n, dtype=np.int64)
    X = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    return X[X.sum(axis=1) > min_size]


def _random_subsets(gen, n, sizes):
    ranks = np.argsort(np.argsort(gen.random((sizes.size, n)), axis=1), axis=1)
    return (ranks < sizes[:, None]).astype(np.float64)


def check_discrepancy(A: RegularDigraph, n0, delta, budget=10**4, rng=None,
                      batch=2048) -> RegularityReport:
    """Test |e(I,J) - (d/n)|I||J|| < delta (d/n) |I||J| for |I|, |J| > n0.

    All pairs are examined when 4**n <= budget; otherwise ``budget`` random
    pairs are drawn with log-uniform sizes in (n0, n].
    """
    n, d = A.n, A.d
    n0 = int(n0)
    delta = float(delta)
    if not (1 <= n0 <= n) or not delta > 0:
        raise BadParams("need 1 <= n0 <= n and delta > 0")
    params = {"n0": n0, "delta": delta}
    M = A.dense.astype(np.float64)
    p = d / n
    if n0 >= n:
        return RegularityReport("discrepancy", params, CERT_PASS, None, 0, {"max_ratio": 0.0})
    exhaustive = n <= 30 and 4 ** n <= budget
    worst = 0.0
    if exhaustive:
        S = _all_subsets(n, n0)
        E = S @ M @ S.T
        sz = S.sum(axis=1)
        expect = p * np.outer(sz, sz)
        ratio = np.abs(E - expect) / expect
        worst = float(ratio.max()) if ratio.size else 0.0
        bad = np.argwhere(ratio >= delta)
        trials = int(ratio.size)
        witness = None
        if bad.size:
            a, b = bad[0]
            witness = (np.flatnonzero(S[a]).tolist(), np.flatnonzero(S[b]).tolist())
        return RegularityReport("discrepancy", params, _verdict(witness is None, True),
                                witness, trials, {"max_ratio": worst})
    gen = as_generator(rng)
    lo, hi = math.log(n0 + 1), math.log(n + 1)
    done = 0
    witness = None
    while done < budget:
        b = min(batch, budget - done)
        si = np.clip(np.exp(gen.uniform(lo, hi, b)).astype(np.int64), n0 + 1, n)
        sj = np.clip(np.exp(gen.uniform(lo, hi, b)).astype(np.int64), n0 + 1, n)
        X = _random_subsets(gen, n, si)
        Y = _random_subsets(gen, n, sj)
        e = np.einsum("ij,ij->i", X @ M, Y)
        expect = p * si * sj
        ratio = np.abs(e - expect) / expect
        worst = max(worst, float(ratio.max()))
        hit = np.flatnonzero(ratio >= delta)
        done += b
        if hit.size and witness is None:
            k = int(hit[0])
            witness = (np.flatnonzero(X[k]).tolist(), np.flatnonzero(Y[k]).tolist())
            break
    return RegularityReport("discrepancy", params, _verdict(witness is None, False),
                            witness, done, {"max_ratio": worst})


# -- expansion --------------------------------------------------------------

def _in_nbhd_counts(M, X):
    """For each indicator row of X, |N_{A^T}(J)| with J the row's support."""
    return np.count_nonzero(X @ M.T > 0, axis=1)


def _small_size_cap(n, d, kappa):
    return int(math.floor(n / (2 * kappa * d)))


def check_expansion(A: RegularDigraph, kappa, budget=10**5, rng=None,
                    batch=2048) -> RegularityReport:
    """Test |N_{A^T}(J)| > kappa d |J| for all 1 <= |J| <= n / (2 kappa d)."""
    kappa = float(kappa)
    if not 0 < kappa < 1:
        raise BadParams("kappa must lie in (0, 1)")
    n, d = A.n, A.d
    smax = min(n, _small_size_cap(n, d, kappa))
    params = {"kappa": kappa}
    M = A.dense.astype(np.float64)
    if smax < 1:
        return RegularityReport("expansion", params, CERT_PASS, None, 0, {"max_size": smax})
    total = sum(math.comb(n, s) for s in range(1, smax + 1))
    worst = math.inf
    if total <= budget:
        checked = 0
        for s in range(1, smax + 1):
            combos = np.array(list(combinations(range(n), s)), dtype=np.int64)
            for start in range(0, len(combos), batch):
                chunk = combos[start:start + batch]
                X = np.zeros((len(chunk), n))
                X[np.arange(len(chunk))[:, None], chunk] = 1
                cnt = _in_nbhd_counts(M, X)
                ratio = cnt / (d * s)
                worst = min(worst, float(ratio.min()))
                bad = np.flatnonzero(cnt <= kappa * d * s)
                checked += len(chunk)
                if bad.size:
                    J = chunk[bad[0]].tolist()
                    return RegularityReport("expansion", params, CERT_FAIL, J, checked,
                                            {"max_size": smax, "min_ratio": worst})
        return RegularityReport("expansion", params, CERT_PASS, None, checked,
                                {"max_size": smax, "min_ratio": worst})
    gen = as_generator(rng)
    # sizes biased toward small |J|: P(s) proportional to 1/s
    w = 1.0 / np.arange(1, smax + 1)
    w /= w.sum()
    done = 0
    while done < budget:
        b = min(batch, budget - done)
        sizes = gen.choice(np.arange(1, smax + 1), size=b, p=w)
        X = _random_subsets(gen, n, sizes)
        cnt = _in_nbhd_counts(M, X)
        worst = min(worst, float((cnt / (d * sizes)).min()))
        bad = np.flatnonzero(cnt <= kappa * d * sizes)
        done += b
        if bad.size:
            J = np.flatnonzero(X[bad[0]]).tolist()
            return RegularityReport("expansion", params, SAMP_FAIL, J, done,
                                    {"max_size": smax, "min_ratio": worst})
    return RegularityReport("expansion", params, SAMP_PASS, None, done,
                            {"max_size": smax, "min_ratio": worst})


def _consequence_violations(M, X, n, d, kappa):
    """Count violations of both expansion consequences for indicator rows X.

    Returns (violations, first_witness, checks).
    """
    sizes = X.sum(axis=1).astype(np.int64)
    inter = np.rint(X @ M.T).astype(np.int64)  # |N_A(i) cap J| per row i
    small = sizes <= n / (2 * kappa * d)
    rmax1 = int(math.ceil(2 / kappa))
    viol = 0
    witness = None
    checks = 0
    for r in range(1, rmax1 + 1):
        lhs = np.count_nonzero((inter >= 1) & (inter <= r), axis=1)
        need = (kappa - 1 / (r + 1)) * d * sizes
        bad = small & (lhs < need)
        checks += int(small.sum())
        if bad.any():
            viol += int(bad.sum())
            if witness is None:
                k = int(np.flatnonzero(bad)[0])
                witness = {"J": np.flatnonzero(X[k]).tolist(), "r": r, "part": 1}
    large = ~small
    if large.any():
        rcap = np.floor(kappa * d * sizes / (4 * n)).astype(np.int64)
        for r in range(1, int(rcap.max(initial=0)) + 1):
            sel = large & (rcap >= r)
            if not sel.any():
                continue
            lhs = np.count_nonzero(inter > r, axis=1)
            bad = sel & (lhs <= n / 8)
            checks += int(sel.sum())
            if bad.any():
                viol += int(bad.sum())
                if witness is None:
                    k = int(np.flatnonzero(bad)[0])
                    witness = {"J": np.flatnonzero(X[k]).tolist(), "r": r, "part": 2}
    return viol, witness, checks


def verify_expansion_consequences(A: RegularDigraph, kappa, budget=10**5, rng=None,
                                  expansion: RegularityReport | None = None,
                                  batch=1024) -> RegularityReport:
    """Check both threshold-neighborhood consequences of expansion.

    ``expansion`` is a previous :func:`check_expansion` report for the same
    kappa; when omitted it is computed here. Raises
    :class:`PrerequisiteMissing` if that report is not a pass.
    """
    kappa = float(kappa)
    if expansion is None:
        expansion = check_expansion(A, kappa, budget=budget, rng=rng)
    if (expansion.property != "expansion" or not expansion.passed
            or expansion.parameters.get("kappa") != kappa):
        raise PrerequisiteMissing("expansion membership at this kappa was not established")
    n, d = A.n, A.d
    M = A.dense.astype(np.float64)
    params = {"kappa": kappa}
    exhaustive = n <= 20 and (1 << n) <= budget
    if exhaustive:
        X = _all_subsets(n, 0)
        viol, witness, checks = _consequence_violations(M, X, n, d, kappa)
        ok = viol == 0
        return RegularityReport("expansion-consequences", params, _verdict(ok, True),
                                witness, checks, {"violations": viol})
    gen = as_generator(rng)
    done = viol = checks = 0
    witness = None
    while done < budget:
        b = min(batch, budget - done)
        sizes = gen.integers(1, n + 1, size=b)
        X = _random_subsets(gen, n, sizes)
        v, w, c = _consequence_violations(M, X, n, d, kappa)
        viol += v
        checks += c
        witness = witness or w
        done += b
    return RegularityReport("expansion-consequences", params, _verdict(viol == 0, False),
                            witness, checks, {"violations": viol})


# -- batch versions over row-bitmask arrays (tiny n) -------------------------

def _subset_masks(n, max_size=None):
    masks = np.arange(1, 1 << n, dtype=np.int64)
    sizes = np.bitwise_count(masks).astype(np.int64)
    if max_size is not None:
        keep = sizes <= max_size
        masks, sizes = masks[keep], sizes[keep]
    return masks, sizes


def _intersections(rows, Jmasks):
    """|N_A(i) cap J| for all digraphs, sets and rows: shape (count, |sets|, n)."""
    return np.bitwise_count(rows[:, None, :] & Jmasks[None, :, None]).astype(np.int64)


def expansion_holds_masks(rows, n, d, kappa) -> np.ndarray:
    """Vectorized exhaustive expansion test for an array of row-bitmask digraphs."""
    rows = np.asarray(rows, dtype=np.int64)
    smax = min(n, _small_size_cap(n, d, kappa))
    if smax < 1:
        return np.ones(len(rows), dtype=bool)
    Jm, sz = _subset_masks(n, smax)
    cnt = np.count_nonzero(_intersections(rows, Jm) > 0, axis=2)
    return np.all(cnt > kappa * d * sz[None, :], axis=1)


def expansion_consequence_violations_masks(rows, n, d, kappa) -> np.ndarray:
    """Per-digraph violation counts of both consequences, exhaustive over J."""
    rows = np.asarray(rows, dtype=np.int64)
    Jm, sz = _subset_masks(n)
    inter = _intersections(rows, Jm)
    small = sz <= n / (2 * kappa * d)
    viol = np.zeros(len(rows), dtype=np.int64)
    for r in range(1, int(math.ceil(2 / kappa)) + 1):
        lhs = np.count_nonzero((inter >= 1) & (inter <= r), axis=2)
        need = (kappa - 1 / (r + 1)) * d * sz
        viol += np.count_nonzero((lhs < need[None, :]) & small[None, :], axis=1)
    rcap = np.floor(kappa * d * sz / (4 * n)).astype(np.int64)
    for r in range(1, int(rcap.max(initial=0)) + 1):
        sel = (~small) & (rcap >= r)
        if not sel.any():
            continue
        lhs = np.count_nonzero(inter > r, axis=2)
        viol += np.count_nonzero((lhs <= n / 8) & sel[None, :], axis=1)
    return viol
