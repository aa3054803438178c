"""Input validation helpers shared by the public functions."""
from __future__ import annotations

import numpy as np

from .errors import BadParams, IndexOutOfRange, NotSquare, NotZeroOne


def check_square(M, dtype=None) -> np.ndarray:
    """Return ``M`` as a 2-d square array, raising :class:`NotSquare` otherwise."""
    arr = np.asarray(M, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise NotSquare(f"expected a nonempty square matrix, got shape {arr.shape}")
    return arr


def check_zero_one(M) -> np.ndarray:
    """Return a square 0-1 matrix as ``uint8``."""
    arr = check_square(M)
    if arr.dtype == np.uint8 or arr.dtype == np.bool_:
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        if arr.max(initial=0) > 1:
            raise NotZeroOne("entries must be 0 or 1")
        return arr
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise NotZeroOne("entries must be 0 or 1")
        arr = arr.real
    bad = (arr != 0) & (arr != 1)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise NotZeroOne(f"entry ({i + 1},{j + 1}) = {arr[i, j]} is not 0 or 1")
    return arr.astype(np.uint8)


def check_index_set(J, n: int) -> np.ndarray:
    """Sorted unique 0-based indices, each in ``range(n)``."""
    idx = np.unique(np.asarray(list(J) if not isinstance(J, np.ndarray) else J, dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexOutOfRange(f"indices must lie in [0, {n - 1}]")
    return idx


def check_vertex(i, n: int) -> int:
    i = int(i)
    if not 0 <= i < n:
        raise IndexOutOfRange(f"vertex {i} outside [0, {n - 1}]")
    return i


def check_probability(p, *, open_interval=True, name="p") -> float:
    p = float(p)
    ok = 0 < p < 1 if open_interval else 0 <= p <= 1
    if not ok:
        raise BadParams(f"{name}={p} outside the allowed range")
    return p


def check_upper_half_plane(w) -> complex:
    w = complex(w)
    if not w.imag > 0:
        raise BadParams(f"spectral parameter w={w} must have positive imaginary part")
    return w
