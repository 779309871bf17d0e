"""FLAT adaptive binarization and the classical baselines.

Every local method thresholds pixel ``(r, c)`` against statistics of the
clamped square window covering rows ``r - n_a .. r + n_a`` and columns
``c - n_a .. c + n_a``, read from a table by inclusion-exclusion.  FLAT reads
the window from the fuzzy integral image, Bradley from the classical SAT, so
the two differ only in the table.  Output polarity: 1 marks dark
(foreground) pixels, those at or below the local threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregators import AggregatorKind
from .image import check_gray, check_same_shape
from .integral import fuzzy_integral_image, padded, sat

__all__ = [
    "BinarizeParams",
    "BaselineParams",
    "window_radius",
    "window_bounds",
    "window_means",
    "window_mean_std",
    "flat_binarize",
    "flat",
    "bradley",
    "niblack",
    "sauvola",
    "otsu",
    "otsu_threshold",
]

SAUVOLA_R = 128.0 / 255.0


@dataclass(frozen=True)
class BinarizeParams:
    """Sensitivity ``t`` and the window divisors ``a1``, ``a2``."""

    t: float = 0.5
    a1: int = 3
    a2: int = 1

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"sensitivity t must be in [0, 1], got {self.t}")
        if int(self.a1) != self.a1 or int(self.a2) != self.a2 or self.a1 < 1 or self.a2 < 1:
            raise ValueError(f"a1 and a2 must be integers >= 1, got {self.a1}, {self.a2}")

    def radius(self, shape) -> int:
        return window_radius(shape[0], shape[1], self.a1, self.a2)


@dataclass(frozen=True)
class BaselineParams:
    niblack_k: float = 0.0
    sauvola_k: float = 0.2
    # given on the 0-255 scale
    sauvola_r: float = 128.0

    def __post_init__(self):
        if self.sauvola_r <= 0:
            raise ValueError(f"sauvola_r must be > 0, got {self.sauvola_r}")

    @property
    def sauvola_r_unit(self) -> float:
        return self.sauvola_r / 255.0


def window_radius(n, m, a1, a2) -> int:
    """``floor(min(n, m) / (a1 * a2))``; a zero radius is a parameter error."""
    if a1 < 1 or a2 < 1:
        raise ValueError(f"a1 and a2 must be >= 1, got {a1}, {a2}")
    na = min(n, m) // (a1 * a2)
    if na < 1:
        raise ValueError(f"window radius is 0 for a {n}x{m} image with a1={a1}, a2={a2}")
    return na


def window_bounds(length, na):
    """Exclusive-start / inclusive-end bounds (zero-border coordinates) per index."""
    idx = np.arange(length)
    lo = np.maximum(idx - na, 0)
    hi = np.minimum(idx + na + 1, length)
    return lo, hi


def window_means(tbl, na):
    """Windowed means of a table plus a rounding allowance for tie comparisons.

    Returns ``(mean, tol)`` where ``tol`` bounds the floating-point error of the
    inclusion-exclusion relative to an exact evaluation, so values that are
    mathematically equal to the mean compare as equal.
    """
    tbl = np.asarray(tbl, dtype=np.float64)
    n, m = tbl.shape
    P = padded(tbl)
    y0, y1 = window_bounds(n, na)
    x0, x1 = window_bounds(m, na)
    Y0, Y1 = y0[:, None], y1[:, None]
    ps = P[Y1, x1] - P[Y0, x1] - P[Y1, x0] + P[Y0, x0]
    area = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    scale = max(1.0, float(np.abs(tbl).max(initial=0.0)))
    tol = 16.0 * np.finfo(np.float64).eps * scale / area
    return ps / area, tol


def flat_binarize(img, table, params: BinarizeParams) -> np.ndarray:
    """Threshold ``img`` against windowed means of ``table`` scaled by ``1 - t``."""
    img = check_gray(img)
    table = np.asarray(table, dtype=np.float64)
    check_same_shape(img, table)
    mean, tol = window_means(table, params.radius(img.shape))
    return (img <= mean * (1.0 - params.t) + tol).astype(np.uint8)


def flat(img, kind, params: BinarizeParams) -> np.ndarray:
    """Both FLAT steps: fuzzy integral image for ``kind``, then binarization."""
    _, F = fuzzy_integral_image(img, AggregatorKind.parse(kind))
    return flat_binarize(img, F, params)


def bradley(img, params: BinarizeParams) -> np.ndarray:
    img = check_gray(img)
    return flat_binarize(img, sat(img), params)


def window_mean_std(img, na):
    """Window mean, population std and tie allowance from SATs of ``img`` and ``img**2``."""
    mean, tol = window_means(sat(img), na)
    sq_mean, _ = window_means(sat(img * img), na)
    var = np.maximum(sq_mean - mean * mean, 0.0)
    return mean, np.sqrt(var), tol


def niblack(img, params: BinarizeParams, k=0.0) -> np.ndarray:
    """Threshold at ``mean + k * std`` of the window (population std)."""
    img = check_gray(img)
    mean, std, tol = window_mean_std(img, params.radius(img.shape))
    return (img <= mean + k * std + tol).astype(np.uint8)


def sauvola(img, params: BinarizeParams, k=0.2, r=SAUVOLA_R) -> np.ndarray:
    """Threshold at ``mean * (1 + k * (std / r - 1))``; ``r`` is on the [0, 1] scale."""
    if r <= 0:
        raise ValueError(f"dynamic range r must be > 0, got {r}")
    img = check_gray(img)
    mean, std, tol = window_mean_std(img, params.radius(img.shape))
    return (img <= mean * (1.0 + k * (std / r - 1.0)) + tol).astype(np.uint8)


def otsu_threshold(img, bins=256):
    """Otsu's global threshold over a ``bins``-bin histogram of [0, 1].

    Returns ``(threshold, degenerate)``.  Pixels strictly below ``threshold``
    (the upper edge of the last background bin) are foreground.  Ties in the
    between-class variance go to the lowest bin; a histogram with a single
    occupied bin is degenerate and yields threshold 0.
    """
    img = check_gray(img)
    idx = np.minimum((img * bins).astype(np.int64), bins - 1)
    hist = np.bincount(idx.ravel(), minlength=bins).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        return 0.0, True
    total = hist.sum()
    centers = (np.arange(bins) + 0.5) / bins
    c0 = np.cumsum(hist)
    c1 = total - c0
    w0 = c0 / total
    mu = np.cumsum(hist * centers) / total
    mu_t = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu_t * w0 - mu) ** 2 / (w0 * (c1 / total))
    between[(c0 == 0) | (c1 == 0)] = -1.0
    k = int(np.argmax(between))
    return (k + 1) / bins, False


def otsu(img) -> np.ndarray:
    img = check_gray(img)
    threshold, degenerate = otsu_threshold(img)
    if degenerate:
        return np.zeros(img.shape, dtype=np.uint8)
    return (img < threshold).astype(np.uint8)
