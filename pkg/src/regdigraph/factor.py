"""d-regular factors of 0-1 matrices.

A d-regular factor of a 0-1 matrix B is a matrix in A(n, d) supported on
the ones of B. It exists iff for every column set T,

    X_T = sum_i min(d, deg_T(i)) >= d |T|,   deg_T(i) = |{j in T: b_ij = 1}|.

:func:`find_regular_factor` decides this with a max-flow computation and
extracts a violating T from a minimum cut when no factor exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .digraph import RegularDigraph, from_dense
from .errors import BadParams, NonIntegralD, TooLarge
from .rng import as_stream
from .sampler import enumerate_regular_masks
from .validation import check_zero_one

__all__ = [
    "FactorResult",
    "ore_ryser_value",
    "ore_ryser_exhaustive",
    "find_regular_factor",
    "factor_probability",
    "membership_probability_exact",
    "count_regular",
]


@dataclass
class FactorResult:
    exists: bool
    factor: RegularDigraph | None = None
    certificate: list | None = None
    deficit: int | None = None  # d|T| - X_T for the certificate
    flow_value: int | None = None


def ore_ryser_value(B, d, T) -> int:
    """X_T for the column set T."""
    B = check_zero_one(B)
    T = np.asarray(sorted(set(int(t) for t in T)), dtype=np.int64)
    if T.size == 0:
        return 0
    deg = B[:, T].sum(axis=1, dtype=np.int64)
    return int(np.minimum(deg, d).sum())


def ore_ryser_exhaustive(B, d, max_n=20, chunk=1 << 16) -> FactorResult:
    """Check the condition over all 2^n column sets (first violation in bitmask order)."""
    B = check_zero_one(B)
    n = B.shape[0]
    d = int(d)
    if n > max_n:
        raise TooLarge(f"exhaustive Ore-Ryser check capped at n <= {max_n}")
    if not 0 <= d <= n:
        raise BadParams("need 0 <= d <= n")
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    rows = (B.astype(np.int64) * weights).sum(axis=1)
    for start in range(1, 1 << n, chunk):
        T = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        deg = np.bitwise_count(rows[None, :] & T[:, None]).astype(np.int64)
        X = np.minimum(deg, d).sum(axis=1)
        size = np.bitwise_count(T).astype(np.int64)
        bad = np.flatnonzero(X < d * size)
        if bad.size:
            t = int(T[bad[0]])
            cert = [j for j in range(n) if t >> j & 1]
            return FactorResult(False, None, cert, int(d * size[bad[0]] - X[bad[0]]))
    return FactorResult(True)


def _network(B, d):
    n = B.shape[0]
    src, sink = 0, 2 * n + 1
    ri, cj = np.nonzero(B)
    u = np.concatenate([np.zeros(n, np.int64), ri + 1, np.arange(n) + n + 1])
    v = np.concatenate([np.arange(n) + 1, cj + n + 1, np.full(n, sink)])
    cap = np.concatenate([np.full(n, d), np.ones(ri.size, np.int64), np.full(n, d)])
    C = sparse.csr_matrix((cap.astype(np.int32), (u, v)), shape=(2 * n + 2, 2 * n + 2))
    return C, src, sink


def find_regular_factor(B, d) -> FactorResult:
    """Max-flow decision of factor existence (scipy's Dinic implementation).

    On success the factor is read off the saturated row-to-column edges;
    on failure the certificate is the set of columns not reachable from the
    source in the residual network, which always violates the condition.
    """
    B = check_zero_one(B)
    n = B.shape[0]
    d = int(d)
    if not 0 <= d <= n:
        raise BadParams("need 0 <= d <= n")
    if d == 0:
        return FactorResult(True, from_dense(np.zeros((n, n), np.uint8), 0), flow_value=0)
    C, src, sink = _network(B, d)
    res = maximum_flow(C, src, sink, method="dinic")
    F = res.flow.tocsr()
    val = int(res.flow_value)
    if val == n * d:
        mid = F[1:n + 1, n + 1:2 * n + 1].toarray()
        return FactorResult(True, from_dense((mid > 0).astype(np.uint8), d), flow_value=val)
    R = (C - F).tocsr()
    R.data = np.where(R.data > 0, 1, 0).astype(np.int32)
    R.eliminate_zeros()
    reach = breadth_first_order(R, src, directed=True, return_predecessors=False)
    seen = np.zeros(2 * n + 2, dtype=bool)
    seen[reach] = True
    T = [j for j in range(n) if not seen[n + 1 + j]]
    X = ore_ryser_value(B, d, T)
    return FactorResult(False, None, T, d * len(T) - X, flow_value=val)


def count_regular(n, d, max_n=6) -> int:
    """|A(n, d)|, with closed forms for d in {0, 1, n-1, n}."""
    n, d = int(n), int(d)
    if not 0 <= d <= n:
        raise BadParams("need 0 <= d <= n")
    if d in (0, n):
        return 1
    if d in (1, n - 1):
        return math.factorial(n)
    return len(enumerate_regular_masks(n, d, max_n=max_n))


def membership_probability_exact(n, d, p, max_n=6) -> float:
    """P(B in A(n, d)) for B with iid Bernoulli(p) entries."""
    p = float(p)
    if not 0 <= p <= 1:
        raise BadParams("p must lie in [0, 1]")
    return count_regular(n, d, max_n=max_n) * p ** (n * d) * (1 - p) ** (n * n - n * d)


@dataclass
class FactorProbabilityReport:
    estimate: float
    successes: int
    samples: int
    d: int
    fitted_c: float | None
    params: dict


def factor_probability(n, p, delta, samples, rng=None) -> FactorProbabilityReport:
    """MC probability that a Bernoulli(p) matrix has a d-factor, d = (1 - delta) p n."""
    if not 0 < delta <= 0.5 or not 0 < p <= 1:
        raise BadParams("need 0 < delta <= 1/2 and 0 < p <= 1")
    dd = (1 - delta) * p * n
    d = int(round(dd))
    if abs(dd - d) > 1e-9 * max(1.0, dd):
        raise NonIntegralD(f"(1 - delta) p n = {dd} is not an integer")
    st = as_stream(rng)
    ok = 0
    for k in range(samples):
        gen = st.child(k).generator()
        B = (gen.random((n, n)) < p).astype(np.uint8)
        ok += find_regular_factor(B, d).exists
    est = ok / samples
    c = None if est >= 1 else -math.log(1 - est) / (delta * delta * p * n)
    return FactorProbabilityReport(est, ok, samples, d, c,
                                   {"n": n, "p": p, "delta": delta, "seed": st.master_seed})
