"""Regular digraphs and exact combinatorial queries on them.

A :class:`RegularDigraph` is an element of A(n, d): an n x n 0-1 matrix
whose rows and columns all sum to d. Self-loops are allowed. Vertices are
0-based inside the package; the JSON/CSV writers use 1-based labels.
"""
from __future__ import annotations

import csv
import io
import json
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateScale,
    DegreeOverflow,
    IndexOutOfRange,
    NotRegular,
    NotZeroOne,
    SameVertex,
)
from .validation import check_index_set, check_vertex, check_zero_one

__all__ = [
    "RegularDigraph",
    "from_dense",
    "from_out_adj",
    "circulant",
    "complement",
    "normalized",
    "codegree",
    "edge_count",
    "threshold_neighborhood",
    "to_json",
    "from_json",
    "read_matrix_csv",
    "write_matrix_csv",
    "match_spectra",
    "integer_spectrum",
]


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class RegularDigraph:
    """Immutable d-regular digraph on ``n`` vertices.

    Stores sorted out- and in-adjacency arrays of shape ``(n, d)``; the
    dense 0-1 matrix is materialized on first use and cached.
    """

    __slots__ = ("n", "d", "out_adj", "in_adj", "__dict__")

    def __init__(self, n, d, out_adj, in_adj, dense=None):
        self.n = int(n)
        self.d = int(d)
        self.out_adj = _frozen(np.asarray(out_adj, dtype=np.int64).reshape(self.n, self.d))
        self.in_adj = _frozen(np.asarray(in_adj, dtype=np.int64).reshape(self.n, self.d))
        if dense is not None:
            self.__dict__["dense"] = _frozen(dense.astype(np.uint8, copy=False))

    @cached_property
    def dense(self) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=np.uint8)
        rows = np.repeat(np.arange(self.n), self.d)
        M[rows, self.out_adj.ravel()] = 1
        return _frozen(M)

    @cached_property
    def _key(self) -> bytes:
        return self.out_adj.tobytes()

    def __eq__(self, other):
        if not isinstance(other, RegularDigraph):
            return NotImplemented
        return self.n == other.n and self.d == other.d and self._key == other._key

    def __hash__(self):
        return hash((self.n, self.d, self._key))

    def __repr__(self):
        return f"RegularDigraph(n={self.n}, d={self.d})"

    def out_neighbors(self, i) -> np.ndarray:
        return self.out_adj[check_vertex(i, self.n)]

    def in_neighbors(self, j) -> np.ndarray:
        return self.in_adj[check_vertex(j, self.n)]

    def row_masks(self) -> np.ndarray:
        """Row supports as integer bitmasks (requires n <= 63)."""
        if self.n > 63:
            raise ValueError("bitmask view needs n <= 63")
        weights = np.left_shift(np.int64(1), np.arange(self.n, dtype=np.int64))
        return (self.dense.astype(np.int64) * weights).sum(axis=1)

    def check_invariants(self) -> None:
        """Full cross-scan of both adjacency views; raises on any violation."""
        n, d = self.n, self.d
        for name, adj in (("out", self.out_adj), ("in", self.in_adj)):
            if adj.shape != (n, d):
                raise NotRegular(name, 0, adj.shape[1] if adj.ndim == 2 else -1, d)
            if adj.size and (adj.min() < 0 or adj.max() >= n):
                raise IndexOutOfRange(f"{name}-adjacency entry outside [0, n)")
            if d > 1 and np.any(np.diff(adj, axis=1) <= 0):
                raise NotRegular(name, int(np.argmax(np.any(np.diff(adj, axis=1) <= 0, axis=1))), -1, d)
        M = self.dense
        if np.any(M.sum(axis=1) != d) or np.any(M.sum(axis=0) != d):
            bad = np.flatnonzero(M.sum(axis=0) != d)
            raise NotRegular("column", int(bad[0]) if bad.size else 0, -1, d)
        T = np.zeros_like(M)
        cols = np.repeat(np.arange(n), d)
        T[self.in_adj.ravel(), cols] = 1
        if not np.array_equal(T, M):
            raise NotRegular("view", 0, -1, d)


def from_dense(M, d) -> RegularDigraph:
    """Build a digraph from a square 0-1 matrix with all line sums ``d``."""
    A = check_zero_one(M)
    n = A.shape[0]
    d = int(d)
    rs = A.sum(axis=1, dtype=np.int64)
    bad = np.flatnonzero(rs != d)
    if bad.size:
        raise NotRegular("row", int(bad[0]), int(rs[bad[0]]), d)
    cs = A.sum(axis=0, dtype=np.int64)
    bad = np.flatnonzero(cs != d)
    if bad.size:
        raise NotRegular("column", int(bad[0]), int(cs[bad[0]]), d)
    out_adj = np.nonzero(A)[1].reshape(n, d)
    in_adj = np.nonzero(A.T)[1].reshape(n, d)
    return RegularDigraph(n, d, out_adj, in_adj, dense=A)


def from_out_adj(out_adj, n=None) -> RegularDigraph:
    rows = [sorted(set(int(j) for j in r)) for r in out_adj]
    n = len(rows) if n is None else int(n)
    d = len(rows[0]) if rows else 0
    M = np.zeros((n, n), dtype=np.uint8)
    for i, r in enumerate(rows):
        if any(j < 0 or j >= n for j in r):
            raise IndexOutOfRange(f"row {i + 1} has an out-neighbor outside [1, {n}]")
        M[i, r] = 1
    return from_dense(M, d)


def circulant(n, d) -> RegularDigraph:
    """The digraph with out_adj[i] = {i, i+1, ..., i+d-1} mod n."""
    n, d = int(n), int(d)
    M = np.zeros((n, n), dtype=np.uint8)
    idx = np.arange(n)
    for s in range(d):
        M[idx, (idx + s) % n] = 1
    return from_dense(M, d)


def complement(A: RegularDigraph, allow_empty=False) -> RegularDigraph | np.ndarray:
    """The (n - d)-regular digraph with matrix 11^T - A.

    When ``d == n`` the complement is the zero matrix; that raises
    :class:`DegreeOverflow` unless ``allow_empty`` is set, in which case
    the zero matrix itself is returned.
    """
    if A.d == A.n:
        if allow_empty:
            return np.zeros((A.n, A.n), dtype=np.uint8)
        raise DegreeOverflow("complement of the complete digraph has degree 0")
    return from_dense(1 - A.dense, A.n - A.d)


def normalized(A: RegularDigraph) -> np.ndarray:
    """``A / sqrt(d (1 - d/n))`` as a float matrix."""
    if A.d <= 0 or A.d >= A.n:
        raise DegenerateScale(f"d={A.d} gives a zero normalization for n={A.n}")
    return A.dense / np.sqrt(A.d * (1.0 - A.d / A.n))


def codegree(A: RegularDigraph, i1, i2) -> int:
    """Number of common out-neighbors of two distinct vertices."""
    i1 = check_vertex(i1, A.n)
    i2 = check_vertex(i2, A.n)
    if i1 == i2:
        raise SameVertex("codegree needs two distinct vertices")
    return int(np.intersect1d(A.out_adj[i1], A.out_adj[i2], assume_unique=True).size)


def edge_count(A: RegularDigraph, I, J) -> int:
    """e_A(I, J): number of edges from I to J."""
    I = check_index_set(I, A.n)
    J = check_index_set(J, A.n)
    if I.size == 0 or J.size == 0:
        return 0
    return int(A.dense[np.ix_(I, J)].sum(dtype=np.int64))


_MODES = {
    "<=": lambda c, r: (c >= 1) & (c <= r),
    ">=": lambda c, r: c >= r,
    "<": lambda c, r: (c >= 1) & (c < r),
    ">": lambda c, r: c > r,
}


def threshold_neighborhood(A: RegularDigraph, J, r, mode) -> np.ndarray:
    """Vertices whose out-neighborhood meets ``J`` in a number of points related to ``r``.

    ``mode`` is one of ``"<="``, ``">="``, ``"<"``, ``">"`` (the unicode
    forms are accepted too). The two "below" modes only count vertices with
    at least one out-neighbor in ``J``.
    """
    mode = {"≤": "<=", "≥": ">="}.get(mode, mode)
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}")
    J = check_index_set(J, A.n)
    if J.size == 0:
        return np.empty(0, dtype=np.int64)
    counts = A.dense[:, J].sum(axis=1, dtype=np.int64)
    return np.flatnonzero(_MODES[mode](counts, int(r)))


def match_spectra(a, b, tol):
    """Greedy nearest-neighbour matching of two eigenvalue multisets.

    Returns the number of elements of ``a`` left unmatched within ``tol``.
    """
    a = list(np.asarray(a, dtype=complex))
    b = np.asarray(b, dtype=complex)
    used = np.zeros(b.size, dtype=bool)
    unmatched = 0
    for x in sorted(a, key=lambda z: (z.real, z.imag)):
        dist = np.abs(b - x)
        dist[used] = np.inf
        k = int(np.argmin(dist)) if b.size else -1
        if k >= 0 and dist[k] <= tol:
            used[k] = True
        else:
            unmatched += 1
    return unmatched


def integer_spectrum(M, digits=30) -> np.ndarray:
    """Eigenvalues of an integer matrix with multiplicity.

    Floating-point eigensolvers smear defective eigenvalues (those with
    nontrivial Jordan blocks) by roughly eps^(1/k); here the characteristic
    polynomial is formed exactly, split into square-free factors, and each
    factor is solved numerically, so repeated roots come out exact.
    Intended for small n.
    """
    import sympy

    M = np.asarray(M)
    if M.dtype.kind not in "biu":
        raise ValueError("integer_spectrum needs an integer matrix")
    x = sympy.Symbol("x")
    cp = sympy.Matrix(M.astype(object)).charpoly(x)
    out = []
    for fac, mult in sympy.sqf_list(cp.as_expr(), x)[1]:
        roots = sympy.Poly(fac, x).nroots(n=digits)
        out.extend([complex(r) for r in roots] * mult)
    return np.array(out, dtype=complex)


# -- serialization -----------------------------------------------------------

def to_json(A: RegularDigraph) -> dict:
    return {"n": A.n, "d": A.d, "out_adj": (A.out_adj + 1).tolist()}


def from_json(obj) -> RegularDigraph:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    A = from_out_adj([[j - 1 for j in row] for row in obj["out_adj"]], n=obj["n"])
    if A.d != obj["d"]:
        raise NotRegular("row", 0, A.d, obj["d"])
    return A


def read_matrix_csv(path_or_text) -> np.ndarray:
    """Read a comma separated numeric matrix (no header)."""
    if isinstance(path_or_text, str) and "\n" not in path_or_text and "," not in path_or_text:
        with open(path_or_text, newline="") as fh:
            text = fh.read()
    else:
        text = path_or_text
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    try:
        vals = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise NotZeroOne(f"non-numeric CSV entry: {exc}") from None
    arr = np.array(vals)
    if np.all(arr == np.round(arr)):
        arr = arr.astype(np.int64)
    return arr


def write_matrix_csv(M, fh) -> None:
    M = np.asarray(M)
    w = csv.writer(fh, lineterminator="\n")
    for row in M:
        w.writerow([int(x) for x in row])
