"""Summed-area tables and fuzzy integral images.

``fuzzy_integral_image`` builds the classical integral image ``S`` and the
fuzzy integral image ``F`` in the same row-major pass.  Each interior cell
aggregates the four SAT corners of its 2x2 operative window; the corner
ordering comes for free because ``S`` is monotone: ``S[r-1, c-1]`` is the
minimum, ``S[r, c]`` the maximum, and the two remaining corners only need a
single compare-and-swap.  First-row and first-column cells aggregate the two
available corners with the arity-2 uniform measure ``[1, 0.5]``; the origin
copies ``S[0, 0]``.

Tables keep the image shape.  Rectangle queries treat index 0 of the 1-based
table coordinates as a virtual zero border.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .aggregators import AggregatorKind, aggregate, mu_uniform
from .image import Rect, check_gray

__all__ = [
    "sat",
    "sat_bruteforce",
    "fuzzy_integral_image",
    "fuzzy_integral_image_reference",
    "padded",
    "rect_sum",
    "rect_mean",
]


@njit(cache=True, nogil=True)
def _ham(x, mu):
    den = x * (1.0 - mu) + mu
    if den == 0.0:
        return 0.0
    return x * mu / den


@njit(cache=True, nogil=True)
def _agg4(kind, v1, v2, v3, v4):
    # measure vector [1, 0.75, 0.5, 0.25]
    if kind == 1:
        return max(max(min(v1, 1.0), min(v2, 0.75)), max(min(v3, 0.5), min(v4, 0.25)))
    if kind == 2:
        return v1 * 1.0 + v2 * 0.75 + v3 * 0.5 + v4 * 0.25
    if kind == 3:
        return _ham(v1, 1.0) + _ham(v2, 0.75) + _ham(v3, 0.5) + _ham(v4, 0.25)
    return v1 * 1.0 + (v2 - v1) * 0.75 + (v3 - v2) * 0.5 + (v4 - v3) * 0.25


@njit(cache=True, nogil=True)
def _agg2(kind, v1, v4):
    # measure vector [1, 0.5]
    if kind == 1:
        return max(min(v1, 1.0), min(v4, 0.5))
    if kind == 2:
        return v1 * 1.0 + v4 * 0.5
    if kind == 3:
        return _ham(v1, 1.0) + _ham(v4, 0.5)
    return v1 * 1.0 + (v4 - v1) * 0.5


@njit(cache=True, nogil=True)
def _sat_kernel(img, S):
    n, m = img.shape
    for r in range(n):
        for c in range(m):
            if r > 0 and c > 0:
                S[r, c] = img[r, c] + S[r, c - 1] + S[r - 1, c] - S[r - 1, c - 1]
            elif r > 0:
                S[r, c] = img[r, c] + S[r - 1, c]
            elif c > 0:
                S[r, c] = img[r, c] + S[r, c - 1]
            else:
                S[r, c] = img[r, c]


@njit(cache=True, nogil=True)
def _flat_kernel(img, kind, S, F, visits, check):
    n, m = img.shape
    count = visits.size > 0
    for r in range(n):
        for c in range(m):
            if count:
                visits[r, c] += 1
            if r > 0 and c > 0:
                v1 = S[r - 1, c - 1]
                s1 = S[r, c - 1]
                s2 = S[r - 1, c]
                S[r, c] = img[r, c] + s1 + s2 - v1
                v4 = S[r, c]
                if s1 < s2:
                    v2 = s1
                    v3 = s2
                else:
                    v2 = s2
                    v3 = s1
                if check:
                    tol = 1e-9 * max(1.0, v4)
                    if v1 > v2 + tol or v3 > v4 + tol:
                        raise ValueError("SAT corners are not ordered")
                F[r, c] = _agg4(kind, v1, v2, v3, v4)
            elif r > 0:
                v1 = S[r - 1, c]
                S[r, c] = img[r, c] + v1
                F[r, c] = _agg2(kind, v1, S[r, c])
            elif c > 0:
                v1 = S[r, c - 1]
                S[r, c] = img[r, c] + v1
                F[r, c] = _agg2(kind, v1, S[r, c])
            else:
                S[r, c] = img[r, c]
                F[r, c] = S[r, c]


def sat(img) -> np.ndarray:
    """Integral image via the SAT recurrence (one pass, O(n*m))."""
    img = check_gray(img)
    S = np.empty_like(img)
    _sat_kernel(img, S)
    return S


def sat_bruteforce(img) -> np.ndarray:
    """Integral image by direct double summation; test oracle only."""
    img = check_gray(img)
    n, m = img.shape
    S = np.zeros_like(img)
    for x in range(n):
        for y in range(m):
            total = 0.0
            for i in range(x + 1):
                for j in range(y + 1):
                    total += img[i, j]
            S[x, y] = total
    return S


def fuzzy_integral_image(img, kind, *, check=False, visits=None):
    """Compute ``(S, F)`` for aggregator ``kind`` in a single pass.

    ``check`` verifies the corner ordering at every interior cell.  ``visits``,
    when given, is an int64 array of the image shape incremented once for
    every cell the pass processes.
    """
    img = check_gray(img)
    kind = AggregatorKind.parse(kind)
    S = np.empty_like(img)
    F = np.empty_like(img)
    if visits is None:
        visits = np.zeros((0, 0), dtype=np.int64)
    elif visits.shape != img.shape or visits.dtype != np.int64:
        raise ValueError("visits must be an int64 array of the image shape")
    _flat_kernel(img, int(kind), S, F, visits, bool(check))
    return S, F


def fuzzy_integral_image_reference(img, kind) -> np.ndarray:
    """Per-cell reference for ``F``: gather the available SAT corners, sort
    them with a general sort and call :func:`aggregate` with ``mu_uniform(k)``."""
    img = check_gray(img)
    kind = AggregatorKind.parse(kind)
    S = img.cumsum(axis=0).cumsum(axis=1)
    n, m = img.shape
    F = np.empty_like(img)
    for r in range(n):
        for c in range(m):
            if r == 0 and c == 0:
                F[r, c] = S[r, c]
                continue
            if r > 0 and c > 0:
                corners = [S[r, c], S[r, c - 1], S[r - 1, c], S[r - 1, c - 1]]
            elif r > 0:
                corners = [S[r, c], S[r - 1, c]]
            else:
                corners = [S[r, c], S[r, c - 1]]
            ov = [0.0] + sorted(corners)
            F[r, c] = aggregate(kind, ov, mu_uniform(len(corners)))
    return F


def padded(tbl) -> np.ndarray:
    """Table with the virtual zero border materialized as row 0 / column 0."""
    return np.pad(np.asarray(tbl, dtype=np.float64), ((1, 0), (1, 0)))


def _at(tbl, y, x):
    if y == 0 or x == 0:
        return 0.0
    return float(tbl[y - 1, x - 1])


def rect_sum(tbl, rect) -> float:
    """Inclusion-exclusion over a table; ``rect`` uses zero-border coordinates."""
    rect = Rect(*rect).validate(np.shape(tbl))
    y0, x0, y1, x1 = rect
    return _at(tbl, y1, x1) - _at(tbl, y0, x1) - _at(tbl, y1, x0) + _at(tbl, y0, x0)


def rect_mean(tbl, rect) -> float:
    rect = Rect(*rect).validate(np.shape(tbl))
    return rect_sum(tbl, rect) / rect.area
