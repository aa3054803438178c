"""Sampling elements of A(n, d) and the switching/coupling constructions.

Three samplers are provided:

* :func:`chain_sample` runs a lazy switch Markov chain from the circulant
  digraph. The chain is symmetric, so its stationary law is uniform on
  A(n, d); its mixing time is not proven and the default length is a
  tunable that is validated empirically at small sizes.
* :func:`rejection_sample` draws iid Bernoulli(d/n) matrices until one is
  d-regular, which is exactly uniform but only feasible for tiny n.
* :func:`enumerate_regular` lists A(n, d) outright (n <= 6 by default).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product

import numba
import numpy as np

from .digraph import RegularDigraph, circulant, from_dense
from .errors import BadDegree, Exhausted, InvalidSpec, PlanMismatch, TooLarge
from .rng import as_generator
from .validation import check_index_set, check_vertex

__all__ = [
    "default_chain_steps",
    "simple_switch",
    "chain_sample",
    "chain_sample_many",
    "rejection_sample",
    "enumerate_regular",
    "enumerate_regular_masks",
    "SwitchSpec",
    "is_switchable",
    "neighborhood_switch",
    "CouplingPlan",
    "build_coupling",
    "apply_coupling",
    "coupling_pushforward",
]

_BLOCK = 1 << 20


def default_chain_steps(n, d) -> int:
    return int(10 * n * d * math.ceil(math.log(n * d + 1)))


def _check_degree(n, d):
    if not (1 <= d <= n - 1):
        raise BadDegree(f"chain sampler needs 1 <= d <= n-1, got n={n}, d={d}")


def simple_switch(A: RegularDigraph, i1, i2, j1, j2) -> RegularDigraph:
    """Swap the 2x2 submatrix at rows (i1, i2), columns (j1, j2) if it is
    an identity or anti-identity pattern; otherwise return ``A``."""
    n = A.n
    i1, i2, j1, j2 = (check_vertex(x, n) for x in (i1, i2, j1, j2))
    if i1 == i2 or j1 == j2:
        raise InvalidSpec("simple switch needs distinct rows and distinct columns")
    M = A.dense
    a, b, c, e = M[i1, j1], M[i1, j2], M[i2, j1], M[i2, j2]
    if not (a == e and b == c and a != b):
        return A
    M = M.copy()
    M[i1, j1], M[i1, j2], M[i2, j1], M[i2, j2] = b, a, e, c
    return from_dense(M, A.d)


# -- chain kernels -----------------------------------------------------------

@numba.njit(cache=True)
def _chain_edge(M, out, i1s, k1s, i2s, k2s):
    for t in range(i1s.shape[0]):
        i1 = i1s[t]
        i2 = i2s[t]
        if i1 == i2:
            continue
        k1 = k1s[t]
        k2 = k2s[t]
        j1 = out[i1, k1]
        j2 = out[i2, k2]
        if j1 == j2 or M[i1, j2] != 0 or M[i2, j1] != 0:
            continue
        M[i1, j1] = 0
        M[i2, j2] = 0
        M[i1, j2] = 1
        M[i2, j1] = 1
        out[i1, k1] = j2
        out[i2, k2] = j1


@numba.njit(cache=True)
def _chain_tuple(M, i1s, j1s, i2s, j2s):
    for t in range(i1s.shape[0]):
        i1 = i1s[t]
        i2 = i2s[t]
        j1 = j1s[t]
        j2 = j2s[t]
        a = M[i1, j1]
        b = M[i1, j2]
        c = M[i2, j1]
        e = M[i2, j2]
        if a == e and b == c and a != b:
            M[i1, j1] = b
            M[i1, j2] = a
            M[i2, j1] = e
            M[i2, j2] = c


@numba.njit(cache=True)
def _chain_edge_many(Ms, outs, i1s, k1s, i2s, k2s):
    for c in range(Ms.shape[0]):
        _chain_edge(Ms[c], outs[c], i1s[c], k1s[c], i2s[c], k2s[c])


@numba.njit(cache=True)
def _chain_tuple_many(Ms, i1s, j1s, i2s, j2s):
    for c in range(Ms.shape[0]):
        _chain_tuple(Ms[c], i1s[c], j1s[c], i2s[c], j2s[c])


def _draw_proposals(gen, n, d, shape, proposal):
    if proposal == "edge":
        i1 = gen.integers(0, n, size=shape, dtype=np.int32)
        k1 = gen.integers(0, d, size=shape, dtype=np.int32)
        i2 = gen.integers(0, n, size=shape, dtype=np.int32)
        k2 = gen.integers(0, d, size=shape, dtype=np.int32)
        return i1, k1, i2, k2
    if proposal == "tuple":
        i1 = gen.integers(0, n, size=shape, dtype=np.int32)
        i2 = (i1 + 1 + gen.integers(0, n - 1, size=shape, dtype=np.int32)) % n
        j1 = gen.integers(0, n, size=shape, dtype=np.int32)
        j2 = (j1 + 1 + gen.integers(0, n - 1, size=shape, dtype=np.int32)) % n
        return i1, j1, i2.astype(np.int32), j2.astype(np.int32)
    raise ValueError(f"unknown proposal {proposal!r}")


def chain_sample(n, d, steps=None, rng=None, proposal="edge") -> RegularDigraph:
    """Run ``steps`` switch proposals from the circulant digraph.

    ``proposal="edge"`` picks two edges uniformly (with replacement) and
    proposes exchanging their heads; ``proposal="tuple"`` picks an ordered
    quadruple (i1, i2, j1, j2) with i1 != i2, j1 != j2 uniformly. Both are
    symmetric lazy proposals, so the chain is reversible with respect to the
    uniform law on A(n, d). Non-applicable proposals still count as steps.
    """
    n, d = int(n), int(d)
    _check_degree(n, d)
    steps = default_chain_steps(n, d) if steps is None else int(steps)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    gen = as_generator(rng)
    seed = circulant(n, d)
    M = np.array(seed.dense, dtype=np.uint8)
    out = np.array(seed.out_adj, dtype=np.int64)
    done = 0
    while done < steps:
        b = min(_BLOCK, steps - done)
        props = _draw_proposals(gen, n, d, b, proposal)
        if proposal == "edge":
            _chain_edge(M, out, *props)
        else:
            _chain_tuple(M, *props)
        done += b
    return from_dense(M, d)


def chain_sample_many(n, d, steps, count, rng=None, proposal="edge", as_dense=True):
    """Run ``count`` independent chains of ``steps`` proposals each.

    Meant for tiny ``n`` where many samples are needed. Returns an array of
    shape ``(count, n, n)`` (or a list of digraphs with ``as_dense=False``).
    """
    n, d, steps, count = int(n), int(d), int(steps), int(count)
    _check_degree(n, d)
    gen = as_generator(rng)
    seed = circulant(n, d)
    result = np.empty((count, n, n), dtype=np.uint8)
    per_block = max(1, min(count, (1 << 22) // max(steps, 1)))
    for start in range(0, count, per_block):
        c = min(per_block, count - start)
        Ms = np.broadcast_to(seed.dense, (c, n, n)).copy()
        props = _draw_proposals(gen, n, d, (c, steps), proposal)
        if proposal == "edge":
            outs = np.broadcast_to(seed.out_adj, (c, n, d)).copy()
            _chain_edge_many(Ms, outs, *props)
        else:
            _chain_tuple_many(Ms, *props)
        result[start:start + c] = Ms
    if as_dense:
        return result
    return [from_dense(M, d) for M in result]


def rejection_sample(n, d, rng=None, max_tries=10**6, max_n=16, return_tries=False):
    """Exact uniform sample from A(n, d) by rejection from Bernoulli(d/n).

    Raises :class:`Exhausted` when ``max_tries`` draws all fail. With
    ``return_tries`` the number of matrices drawn (including the accepted
    one) is returned alongside the sample.
    """
    n, d = int(n), int(d)
    if n > max_n:
        raise TooLarge(f"rejection sampling capped at n <= {max_n}")
    if not (1 <= d <= n):
        raise BadDegree(f"need 1 <= d <= n, got n={n}, d={d}")
    gen = as_generator(rng)
    p = d / n
    tries = 0
    while tries < max_tries:
        b = int(min(1024, max_tries - tries))
        B = (gen.random((b, n, n)) < p)
        ok = np.all(B.sum(axis=2) == d, axis=1) & np.all(B.sum(axis=1) == d, axis=1)
        hit = np.flatnonzero(ok)
        if hit.size:
            k = int(hit[0])
            A = from_dense(B[k].astype(np.uint8), d)
            tries += k + 1
            return (A, tries) if return_tries else A
        tries += b
    raise Exhausted(f"no element of A({n},{d}) in {max_tries} tries")


@lru_cache(maxsize=16)
def _enumerate_rows(n, d):
    combos = list(combinations(range(n), d))
    masks = [sum(1 << j for j in c) for c in combos]
    out = []
    colsum = [0] * n

    def rec(i, prefix):
        if i == n:
            out.append(tuple(prefix))
            return
        rows_left_after = n - i - 1
        for c, mk in zip(combos, masks):
            ok = True
            for j in c:
                if colsum[j] >= d:
                    ok = False
                    break
            if not ok:
                continue
            for j in c:
                colsum[j] += 1
            if all(d - colsum[j] <= rows_left_after for j in range(n)):
                prefix.append(mk)
                rec(i + 1, prefix)
                prefix.pop()
            for j in c:
                colsum[j] -= 1

    rec(0, [])
    return np.array(out, dtype=np.int64).reshape(-1, n)


def enumerate_regular_masks(n, d, max_n=6) -> np.ndarray:
    """All of A(n, d) as an array of row bitmasks, shape ``(count, n)``."""
    n, d = int(n), int(d)
    if n > max_n:
        raise TooLarge(f"enumeration capped at n <= {max_n}")
    if not (0 <= d <= n):
        raise BadDegree(f"need 0 <= d <= n, got n={n}, d={d}")
    masks = _enumerate_rows(n, d)
    masks.setflags(write=False)
    return masks


def masks_to_dense(masks, n) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    bits = (masks[..., None] >> np.arange(n, dtype=np.int64)) & 1
    return bits.astype(np.uint8)


def enumerate_regular(n, d, max_n=6) -> list[RegularDigraph]:
    """All elements of A(n, d) in lexicographic order of their rows."""
    masks = enumerate_regular_masks(n, d, max_n=max_n)
    return [from_dense(M, d) for M in masks_to_dense(masks, n)]


# -- neighborhood switchings -------------------------------------------------

@dataclass(frozen=True)
class SwitchSpec:
    pair: tuple[int, int]
    J: tuple[int, ...]
    Jp: tuple[int, ...]

    def __post_init__(self):
        i, ip = self.pair
        J, Jp = tuple(sorted(set(self.J))), tuple(sorted(set(self.Jp)))
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "Jp", Jp)
        if i == ip:
            raise InvalidSpec("switch pair must be two distinct vertices")
        if set(J) & set(Jp):
            raise InvalidSpec("J and J' must be disjoint")
        if len(J) != len(Jp) or not J:
            raise InvalidSpec("J and J' must be nonempty and of equal size")


def _orientation(M, spec):
    """+1 / -1 for the two switchable configurations, 0 if not switchable."""
    i, ip = spec.pair
    J = list(spec.J)
    Jp = list(spec.Jp)
    if np.all(M[i, J] == 1) and np.all(M[ip, J] == 0) and np.all(M[ip, Jp] == 1) and np.all(M[i, Jp] == 0):
        return 1
    if np.all(M[ip, J] == 1) and np.all(M[i, J] == 0) and np.all(M[i, Jp] == 1) and np.all(M[ip, Jp] == 0):
        return -1
    return 0


def _switch_in_place(M, spec) -> bool:
    o = _orientation(M, spec)
    if o == 0:
        return False
    i, ip = spec.pair
    J = list(spec.J)
    Jp = list(spec.Jp)
    a, b = (i, ip) if o == 1 else (ip, i)
    M[a, J] = 0
    M[a, Jp] = 1
    M[b, Jp] = 0
    M[b, J] = 1
    return True


def is_switchable(A: RegularDigraph, spec: SwitchSpec) -> bool:
    for v in (*spec.pair, *spec.J, *spec.Jp):
        check_vertex(v, A.n)
    return _orientation(A.dense, spec) != 0


def neighborhood_switch(A: RegularDigraph, spec: SwitchSpec) -> RegularDigraph:
    """Exchange the neighbor blocks J, J' between the rows of ``spec.pair``.

    Returns ``A`` unchanged when neither switchable configuration holds.
    The map is an involution on A(n, d).
    """
    for v in (*spec.pair, *spec.J, *spec.Jp):
        check_vertex(v, A.n)
    M = np.array(A.dense)
    if not _switch_in_place(M, spec):
        return A
    return from_dense(M, A.d)


# -- coupling ----------------------------------------------------------------

@dataclass
class CouplingPlan:
    """Random data defining one coupled draw F_{L,L'}(A).

    ``pi`` maps ``I = range(n // 2)`` to ``I' = range(n // 2, 2 * (n // 2))``.
    ``J_map`` / ``Jprime_map`` are keyed by i in ``I_plus | I_minus``.
    """

    n: int
    d: int
    L: tuple[int, ...]
    Lp: tuple[int, ...]
    pi: tuple[int, ...]
    I_plus: frozenset
    I_minus: frozenset
    J_map: dict = field(default_factory=dict)
    Jprime_map: dict = field(default_factory=dict)
    xi: np.ndarray = None

    def switches(self, active_only=True):
        for i in sorted(self.I_plus | self.I_minus):
            if active_only and not self.xi[i]:
                continue
            yield SwitchSpec((i, self.pi[i]), self.J_map[i], self.Jprime_map[i])


def _default_pi(n):
    h = n // 2
    return tuple(range(h, 2 * h))


def _is_good(row_a, row_b, Lset, Lpset):
    """A in good_{L,L'}(a, b), given out-neighborhoods of a and b as sets."""
    La = row_a & Lset
    if row_b & Lset:
        return False
    return len(La) >= 1 and len((row_b & Lpset) - row_a) >= len(La)


def build_coupling(A: RegularDigraph, L, Lp, pi=None, rng=None) -> CouplingPlan:
    """Compute I^+(A), I^-(A) and draw J'_i and xi for the coupling."""
    n = A.n
    L = tuple(int(x) for x in check_index_set(L, n))
    Lp = tuple(int(x) for x in check_index_set(Lp, n))
    if not L or not Lp or set(L) & set(Lp):
        raise InvalidSpec("L and L' must be nonempty and disjoint")
    h = n // 2
    pi = _default_pi(n) if pi is None else tuple(int(x) for x in pi)
    if len(pi) != h or sorted(pi) != list(range(h, 2 * h)):
        raise InvalidSpec("pi must be a bijection from [0, n//2) onto [n//2, 2(n//2))")
    gen = as_generator(rng)
    Lset, Lpset = set(L), set(Lp)
    nbr = [set(int(j) for j in row) for row in A.out_adj]
    I_plus, I_minus = set(), set()
    J_map, Jp_map = {}, {}
    for i in range(h):
        a, b = i, pi[i]
        if _is_good(nbr[a], nbr[b], Lset, Lpset):
            I_plus.add(i)
        elif _is_good(nbr[b], nbr[a], Lset, Lpset):
            I_minus.add(i)
            a, b = b, a
        else:
            continue
        J = sorted(nbr[a] & Lset)
        pool = sorted((nbr[b] & Lpset) - nbr[a])
        pick = gen.choice(len(pool), size=len(J), replace=False)
        J_map[i] = tuple(J)
        Jp_map[i] = tuple(sorted(pool[k] for k in pick))
    xi = gen.integers(0, 2, size=n, dtype=np.int8)
    return CouplingPlan(
        n=n, d=A.d, L=L, Lp=Lp, pi=pi,
        I_plus=frozenset(I_plus), I_minus=frozenset(I_minus),
        J_map=J_map, Jprime_map=Jp_map, xi=xi,
    )


def apply_coupling(A: RegularDigraph, plan: CouplingPlan) -> RegularDigraph:
    """Compose the switchings selected by ``plan.xi``.

    Raises :class:`PlanMismatch` if the plan's dimensions differ from ``A``
    or one of its active switchings is not switchable at ``A``. Because the
    switchings act on disjoint row pairs, a plan applied to its own output
    is switchable again and undoes itself.
    """
    if plan.n != A.n or plan.d != A.d:
        raise PlanMismatch("plan was built for a different (n, d)")
    M = np.array(A.dense)
    changed = False
    for spec in plan.switches():
        if not _switch_in_place(M, spec):
            raise PlanMismatch(f"switching at rows {spec.pair} is not applicable to this matrix")
        changed = True
    return from_dense(M, A.d) if changed else A


def coupling_pushforward(n, d, L, Lp, pi=None, max_n=6) -> np.ndarray:
    """Exact law of F_{L,L'}(A) for A uniform on A(n, d).

    Enumerates A(n, d), every choice of the sets J'_i and every relevant
    xi_i. Returns probabilities indexed like :func:`enumerate_regular`.
    """
    allA = enumerate_regular(n, d, max_n=max_n)
    index = {A: k for k, A in enumerate(allA)}
    out = np.zeros(len(allA))
    for A in allA:
        plan = build_coupling(A, L, Lp, pi=pi, rng=0)
        options = []
        for i in sorted(plan.I_plus | plan.I_minus):
            a = i if i in plan.I_plus else plan.pi[i]
            b = plan.pi[i] if a == i else i
            J = plan.J_map[i]
            pool = sorted(set(A.out_neighbors(b).tolist()) & set(plan.Lp)
                          - set(A.out_neighbors(a).tolist()))
            choices = list(combinations(pool, len(J)))
            options.append([(0.5, None)] + [(0.5 / len(choices), SwitchSpec((i, plan.pi[i]), J, c))
                                             for c in choices])
        for combo in product(*options):
            p = 1.0 / len(allA)
            M = np.array(A.dense)
            for q, spec in combo:
                p *= q
                if spec is not None:
                    _switch_in_place(M, spec)
            out[index[from_dense(M, d)]] += p
    return out
