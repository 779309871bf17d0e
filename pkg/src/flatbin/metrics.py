"""Binarization quality measures: SSIM, MSE and confusion-matrix scores.

The positive class is 1.  Undefined ratios (empty predicted or actual
positive set) evaluate to 0 so heavily imbalanced masks never produce NaN.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import check_binary, check_same_shape

__all__ = [
    "METRIC_KEYS",
    "SSIM_WINDOW",
    "SSIM_SIGMA",
    "SSIM_K1",
    "SSIM_K2",
    "ConfusionCounts",
    "EvalReport",
    "confusion",
    "scalar_metrics",
    "mse",
    "ssim",
    "agreement",
    "evaluate",
]

METRIC_KEYS = ("ssim", "mse", "accuracy", "precision", "recall", "f1", "mcc")

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class EvalReport:
    ssim: float
    mse: float
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float
    method: str = ""
    image: str = ""
    params: dict = field(default_factory=dict)

    def metrics(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_KEYS}

    def to_dict(self) -> dict:
        return asdict(self)


def confusion(pred, gt) -> ConfusionCounts:
    pred = check_binary(pred, "pred").astype(bool)
    gt = check_binary(gt, "gt").astype(bool)
    check_same_shape(pred, gt)
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(pred.size - tp - fp - fn)
    return ConfusionCounts(tp, fp, fn, tn)


def scalar_metrics(c: ConfusionCounts):
    """Return ``(accuracy, precision, recall, f1, mcc)``."""
    tp, fp, fn, tn = c
    total = tp + fp + fn + tn
    if total <= 0:
        raise ValueError("confusion counts are empty")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(den) if den else 0.0
    return accuracy, precision, recall, f1, mcc


def mse(pred, gt) -> float:
    a = np.asarray(pred, dtype=np.float64)
    b = np.asarray(gt, dtype=np.float64)
    check_same_shape(a, b)
    return float(np.mean((a - b) ** 2))


def _gaussian_kernel(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(x, g):
    # separable correlation restricted to windows fully inside the image
    x = sliding_window_view(x, len(g), axis=0) @ g
    return sliding_window_view(x, len(g), axis=1) @ g


def ssim(a, b, data_range=1.0) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5).

    Images smaller than the window on either side are compared with a single
    global, uniformly weighted window.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b)
    if a.ndim != 2:
        raise ValueError("ssim expects 2-D images")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    if min(a.shape) < SSIM_WINDOW:
        mu_a, mu_b = a.mean(), b.mean()
        var_a = np.mean(a * a) - mu_a * mu_a
        var_b = np.mean(b * b) - mu_b * mu_b
        cov = np.mean(a * b) - mu_a * mu_b
    else:
        g = _gaussian_kernel()
        mu_a, mu_b = _filter_valid(a, g), _filter_valid(b, g)
        var_a = _filter_valid(a * a, g) - mu_a * mu_a
        var_b = _filter_valid(b * b, g) - mu_b * mu_b
        cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def agreement(a, b) -> float:
    """Fraction of pixels on which two masks agree."""
    check_same_shape(a, b)
    return float(np.mean(np.asarray(a) == np.asarray(b)))


def evaluate(pred, gt, method="", params=None, image="") -> EvalReport:
    """All seven measures of ``pred`` against ``gt``."""
    counts = confusion(pred, gt)
    accuracy, precision, recall, f1, mcc = scalar_metrics(counts)
    return EvalReport(
        ssim=ssim(pred, gt),
        mse=mse(pred, gt),
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        mcc=mcc,
        method=method,
        image=image,
        params=dict(params or {}),
    )
