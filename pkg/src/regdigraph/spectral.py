"""Eigenvalues, singular values, Hermitization and Stieltjes transforms.

For an n x n matrix M and z in C, the Hermitization is the 2n x 2n matrix

    H_z(M) = [[0, M/sqrt(n) - z], [(M/sqrt(n) - z)^*, 0]]

whose eigenvalues are +-s_i(M/sqrt(n) - z). Its resolvent at w in the upper
half plane is R = (H - w)^{-1}, and g = tr(R) / 2n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import IllConditioned, NumericalFailure, TooLarge
from .validation import check_square, check_upper_half_plane

__all__ = [
    "EmpiricalMeasure",
    "eigenvalues",
    "singular_values",
    "HermitizationView",
    "hermitize",
    "stieltjes_g",
    "stieltjes_from_singular_values",
    "resolvent_derivative_check",
    "log_potential",
    "log_potential_sv",
    "circular_radial_cdf",
    "km_density",
    "km_radial_cdf",
    "ks_distance",
    "smallest_singular_value",
    "perron_excluded",
    "MAX_DENSE_N",
]

MAX_DENSE_N = 4000


class EmpiricalMeasure:
    """Finite weighted point mass on R or C."""

    def __init__(self, atoms, weights=None):
        atoms = np.asarray(atoms).ravel()
        if atoms.size == 0:
            raise ValueError("empty measure")
        if weights is None:
            weights = np.full(atoms.size, 1.0 / atoms.size)
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != atoms.shape or np.any(weights <= 0):
            raise ValueError("weights must be positive, one per atom")
        if abs(weights.sum() - 1) > 1e-12:
            raise ValueError("weights must sum to 1")
        self.atoms = atoms
        self.weights = weights
        self.sorted_desc = None

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.atoms) or bool(np.all(self.atoms.imag == 0))

    def __len__(self):
        return self.atoms.size

    def _real_sorted(self):
        if not self.is_real:
            raise ValueError("CDF queries need a real-supported measure")
        x = np.real(self.atoms)
        o = np.argsort(x, kind="stable")
        return x[o], np.cumsum(self.weights[o])

    def cdf(self, t):
        """Right-continuous CDF evaluated at ``t`` (scalar or array)."""
        x, cw = self._real_sorted()
        k = np.searchsorted(x, np.asarray(t, dtype=float), side="right")
        out = np.where(k > 0, cw[np.maximum(k - 1, 0)], 0.0)
        return np.minimum(out, 1.0)

    def quantile(self, q):
        x, cw = self._real_sorted()
        k = np.searchsorted(cw, np.asarray(q, dtype=float) - 1e-15, side="left")
        return x[np.minimum(k, x.size - 1)]

    def integrate(self, f) -> float | complex:
        return np.sum(self.weights * f(self.atoms))

    def mass(self, lo, hi) -> float:
        """Measure of the closed interval [lo, hi]."""
        x = np.real(self.atoms)
        return float(self.weights[(x >= lo) & (x <= hi)].sum())

    def radial(self) -> "EmpiricalMeasure":
        return EmpiricalMeasure(np.abs(self.atoms), self.weights)

    def angular(self) -> "EmpiricalMeasure":
        """Arguments rescaled to [0, 1)."""
        return EmpiricalMeasure(np.mod(np.angle(self.atoms), 2 * math.pi) / (2 * math.pi),
                                self.weights)

    def symmetrized(self) -> "EmpiricalMeasure":
        return EmpiricalMeasure(np.concatenate([self.atoms, -self.atoms]),
                                np.concatenate([self.weights, self.weights]) / 2)

    @staticmethod
    def average(measures) -> "EmpiricalMeasure":
        measures = list(measures)
        k = len(measures)
        return EmpiricalMeasure(np.concatenate([m.atoms for m in measures]),
                                np.concatenate([m.weights for m in measures]) / k)


def _dense(M):
    M = check_square(M)
    if M.shape[0] > MAX_DENSE_N:
        raise TooLarge(f"dense spectral path capped at n <= {MAX_DENSE_N}")
    if M.dtype.kind in "biu":
        M = M.astype(np.float64)
    return M


def eigenvalues(M) -> EmpiricalMeasure:
    """ESD of M (real Schur path for real input)."""
    M = _dense(M)
    try:
        ev = sla.eigvals(M, check_finite=True, overwrite_a=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalFailure(str(exc)) from None
    return EmpiricalMeasure(ev)


def singular_values(M) -> EmpiricalMeasure:
    """Empirical singular value distribution; ``sorted_desc`` holds s_1 >= ... >= s_n."""
    M = _dense(M)
    try:
        s = sla.svdvals(M, check_finite=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalFailure(str(exc)) from None
    mu = EmpiricalMeasure(s)
    mu.sorted_desc = s
    return mu


def smallest_singular_value(M) -> float:
    return float(singular_values(M).sorted_desc[-1])


class HermitizationView:
    """Shifted, rescaled Hermitization of ``base`` at ``z``."""

    def __init__(self, base, z=0j):
        self.base = _dense(base)
        self.z = complex(z)
        self.n = self.base.shape[0]
        self._mat = None

    def block(self) -> np.ndarray:
        B = self.base / math.sqrt(self.n)
        B = B.astype(complex) if (self.z.imag != 0 or np.iscomplexobj(B)) else B.astype(float)
        B = B - self.z * np.eye(self.n) if self.z != 0 else B
        return B

    @property
    def matrix(self) -> np.ndarray:
        if self._mat is None:
            B = self.block()
            n = self.n
            H = np.zeros((2 * n, 2 * n), dtype=B.dtype)
            H[:n, n:] = B
            H[n:, :n] = B.conj().T
            self._mat = H
        return self._mat

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def resolvent(self, w) -> np.ndarray:
        w = check_upper_half_plane(w)
        H = self.matrix
        return np.linalg.inv(H - w * np.eye(H.shape[0]))

    def stieltjes(self, w, route="direct"):
        return stieltjes_g(self.base, self.z, w, route=route)


def hermitize(M, z=0j) -> HermitizationView:
    return HermitizationView(M, z)


def stieltjes_from_singular_values(s, w) -> complex:
    """(1/2n) sum over +-s_i of 1/(lambda - w) = (1/n) sum w / (s_i^2 - w^2)."""
    s = np.asarray(s, dtype=float)
    w = complex(w)
    return complex(np.mean(w / (s * s - w * w)))


def stieltjes_g(M, z, w, route="direct", rtol=1e-8) -> complex:
    """g_{z,w}(M) = tr((H_z(M) - w)^{-1}) / 2n.

    ``direct`` inverts the 2n x 2n matrix and raises :class:`IllConditioned`
    if the inverse fails a residual check; ``sv`` uses the singular values
    of M/sqrt(n) - z.
    """
    w = check_upper_half_plane(w)
    view = hermitize(M, z)
    if route == "sv":
        s = sla.svdvals(view.block())
        return stieltjes_from_singular_values(s, w)
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")
    H = view.matrix
    Hw = H - w * np.eye(H.shape[0])
    R = np.linalg.inv(Hw)
    res = np.abs(Hw @ R - np.eye(H.shape[0])).max()
    if not np.isfinite(res) or res > rtol * max(1.0, 1.0 / w.imag):
        raise IllConditioned(f"resolvent residual {res:.3g}; use route='sv'")
    return complex(np.trace(R) / H.shape[0])


@dataclass
class DerivativeReport:
    deviation: float
    h: float
    entry: tuple
    dH_nonzeros: int
    dH_value: float


def resolvent_derivative_check(M, z, w, entry, h=1e-6) -> DerivativeReport:
    """Finite difference of R in entry (i, j) of M against -R (dH) R."""
    w = check_upper_half_plane(w)
    M = _dense(M)
    n = M.shape[0]
    i, j = (int(t) for t in entry)
    R0 = hermitize(M, z).resolvent(w)
    Mp = M.astype(complex if np.iscomplexobj(M) else float).copy()
    Mp[i, j] += h
    R1 = hermitize(Mp, z).resolvent(w)
    dH = np.zeros((2 * n, 2 * n))
    dH[i, j + n] = dH[j + n, i] = 1 / math.sqrt(n)
    analytic = -R0 @ dH @ R0
    fd = (R1 - R0) / h
    return DerivativeReport(float(np.abs(fd - analytic).max()), h, (i, j),
                            int(np.count_nonzero(dH)), 1 / math.sqrt(n))


def log_potential(mu: EmpiricalMeasure, z) -> float:
    """U_mu(z) = -sum w_i log|lambda_i - z|; returns +inf when z is an atom."""
    dist = np.abs(mu.atoms - complex(z))
    if np.any(dist == 0):
        return math.inf
    return float(-np.sum(mu.weights * np.log(dist)))


def log_potential_sv(M, z) -> float:
    """-(1/n) sum log s_i(M - z), the singular-value side of the same quantity."""
    M = _dense(M)
    s = sla.svdvals(M - complex(z) * np.eye(M.shape[0]))
    if np.any(s == 0):
        return math.inf
    return float(-np.mean(np.log(s)))


def circular_radial_cdf(r):
    r = np.asarray(r, dtype=float)
    return np.minimum(np.maximum(r, 0.0) ** 2, 1.0)


def km_density(z, d):
    """Oriented Kesten-McKay density at z for degree d."""
    if d < 2:
        raise ValueError("d must be at least 2")
    a2 = np.abs(np.asarray(z, dtype=complex)) ** 2
    inside = a2 <= d
    with np.errstate(divide="ignore", invalid="ignore"):
        val = d * d * (d - 1) / (math.pi * (d * d - a2) ** 2)
    return np.where(inside, val, 0.0)


def km_radial_cdf(r, d):
    """Radial CDF of the oriented Kesten-McKay law: (d-1) r^2 / (d^2 - r^2) up to sqrt(d)."""
    r = np.minimum(np.maximum(np.asarray(r, dtype=float), 0.0), math.sqrt(d))
    return (d - 1) * r * r / (d * d - r * r)


def ks_distance(a: EmpiricalMeasure, b, tol=0.0) -> float:
    """Sup distance between the CDF of ``a`` and ``b`` (a measure or a CDF callable).

    For two measures, ``tol > 0`` treats atoms within ``tol`` of each other
    as tied: the result is sup_t max(F_a(t) - F_b(t + tol), F_b(t) - F_a(t + tol)),
    which equals the plain KS distance when ``tol == 0``.
    """
    x, _ = a._real_sorted()
    if isinstance(b, EmpiricalMeasure):
        y, _ = b._real_sorted()
        pts = np.union1d(x, y)
        if tol == 0:
            return float(np.max(np.abs(a.cdf(pts) - b.cdf(pts))))
        up = np.max(a.cdf(pts) - b.cdf(pts + tol))
        down = np.max(b.cdf(pts) - a.cdf(pts + tol))
        return float(max(up, down, 0.0))
    # continuous reference: compare both one-sided limits at each atom
    ux = np.unique(x)
    right = a.cdf(ux)
    left = np.concatenate([[0.0], right[:-1]])
    F = np.asarray(b(ux), dtype=float)
    return float(max(np.max(np.abs(right - F)), np.max(np.abs(F - left))))


def perron_excluded(ev, k=1) -> np.ndarray:
    """Drop the ``k`` largest-modulus eigenvalues."""
    ev = np.asarray(ev.atoms if isinstance(ev, EmpiricalMeasure) else ev)
    o = np.argsort(-np.abs(ev), kind="stable")
    return ev[np.sort(o[k:])]
