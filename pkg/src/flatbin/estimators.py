"""scikit-learn compatible binarizers.

``X`` is a single 2-D grayscale image, a 3-D stack ``(n_images, rows, cols)``
or a list of 2-D images of any sizes; outputs mirror the input container.
The thresholding methods are unsupervised, so ``fit`` only validates
parameters, except for :class:`OptimalThresholdBinarizer` which learns the
sensitivity from ground truths.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .aggregators import AggregatorKind
from .binarize import BinarizeParams, bradley, flat, niblack, otsu, otsu_threshold, sauvola
from .harness import DEFAULT_THRESHOLDS, SearchSpace, canonical_method, evaluate_space
from .image import check_binary, check_gray
from .integral import fuzzy_integral_image
from .metrics import METRIC_KEYS, evaluate

__all__ = [
    "check_images",
    "FuzzyIntegralTransformer",
    "FlatBinarizer",
    "BradleyBinarizer",
    "NiblackBinarizer",
    "SauvolaBinarizer",
    "OtsuBinarizer",
    "OptimalThresholdBinarizer",
]


def check_images(X, name="X"):
    """Normalize ``X`` to a list of validated gray images plus its container kind."""
    if isinstance(X, (list, tuple)):
        return [check_gray(x, name) for x in X], "list"
    arr = np.asarray(X)
    if arr.ndim == 2:
        return [check_gray(arr, name)], "single"
    if arr.ndim == 3:
        return [check_gray(x, name) for x in arr], "stack"
    raise ValueError(f"{name} must be a 2-D image, a 3-D stack or a list of images, got ndim={arr.ndim}")


def _check_masks(y, n):
    if isinstance(y, (list, tuple)):
        masks = [check_binary(m, "y") for m in y]
    else:
        arr = np.asarray(y)
        masks = [check_binary(arr, "y")] if arr.ndim == 2 else [check_binary(m, "y") for m in arr]
    if len(masks) != n:
        raise ValueError(f"got {len(masks)} ground truths for {n} images")
    return masks


def _wrap(outputs, kind):
    if kind == "single":
        return outputs[0]
    if kind == "stack":
        return np.stack(outputs)
    return outputs


class _Binarizer(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        check_images(X)
        self._validate()
        self.is_fitted_ = True
        return self

    def _validate(self):
        pass

    def _binarize(self, img):
        raise NotImplementedError

    def transform(self, X):
        check_is_fitted(self)
        images, kind = check_images(X)
        return _wrap([self._binarize(img) for img in images], kind)

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y, metric="f1"):
        """Mean of ``metric`` over images (F1 by default; negated for mse)."""
        images, _ = check_images(X)
        masks = _check_masks(y, len(images))
        vals = [getattr(evaluate(self._binarize(img), gt), metric) for img, gt in zip(images, masks)]
        score = float(np.mean(vals))
        return -score if metric == "mse" else score


class _WindowedBinarizer(_Binarizer):
    def _params(self, t=0.0):
        return BinarizeParams(t=t, a1=self.a1, a2=self.a2)


class FuzzyIntegralTransformer(TransformerMixin, BaseEstimator):
    """Map images to their fuzzy integral images ``F`` for one aggregator."""

    def __init__(self, aggregator="a2"):
        self.aggregator = aggregator

    def fit(self, X, y=None):
        check_images(X)
        self.kind_ = AggregatorKind.parse(self.aggregator)
        return self

    def transform(self, X):
        check_is_fitted(self)
        images, kind = check_images(X)
        return _wrap([fuzzy_integral_image(img, self.kind_)[1] for img in images], kind)


class FlatBinarizer(_WindowedBinarizer):
    """FLAT: threshold against windowed means of the fuzzy integral image.

    Parameters
    ----------
    aggregator : {"a1", "a2", "a3", "a4"}
        Sugeno, CF12, Hamacher or Choquet functional.
    t : float in [0, 1]
        Sensitivity; pixels at or below ``(1 - t)`` times the window mean are 1.
    a1, a2 : int
        Window divisors, radius ``floor(min(rows, cols) / (a1 * a2))``.
    """

    def __init__(self, aggregator="a2", t=0.5, a1=3, a2=1):
        self.aggregator = aggregator
        self.t = t
        self.a1 = a1
        self.a2 = a2

    def _validate(self):
        self.kind_ = AggregatorKind.parse(self.aggregator)
        self._params(self.t)

    def _binarize(self, img):
        return flat(img, AggregatorKind.parse(self.aggregator), self._params(self.t))


class BradleyBinarizer(_WindowedBinarizer):
    def __init__(self, t=0.15, a1=3, a2=1):
        self.t = t
        self.a1 = a1
        self.a2 = a2

    def _validate(self):
        self._params(self.t)

    def _binarize(self, img):
        return bradley(img, self._params(self.t))


class NiblackBinarizer(_WindowedBinarizer):
    def __init__(self, k=0.0, a1=3, a2=1):
        self.k = k
        self.a1 = a1
        self.a2 = a2

    def _binarize(self, img):
        return niblack(img, self._params(), k=self.k)


class SauvolaBinarizer(_WindowedBinarizer):
    """Sauvola thresholding; ``r`` is the std dynamic range on the 0-255 scale."""

    def __init__(self, k=0.2, r=128.0, a1=3, a2=1):
        self.k = k
        self.r = r
        self.a1 = a1
        self.a2 = a2

    def _validate(self):
        if self.r <= 0:
            raise ValueError(f"r must be > 0, got {self.r}")

    def _binarize(self, img):
        return sauvola(img, self._params(), k=self.k, r=self.r / 255.0)


class OtsuBinarizer(_Binarizer):
    """Global Otsu threshold per image; degenerate (single-valued) images map to all zeros."""

    def threshold(self, img):
        return otsu_threshold(img)

    def _binarize(self, img):
        return otsu(img)


class OptimalThresholdBinarizer(_WindowedBinarizer):
    """Learn the sensitivity maximizing the mean ``metric`` over training pairs.

    ``fit(X, y)`` sweeps ``thresholds`` for ``method`` at fixed ``a1``, ``a2``;
    ties go to the lower threshold.  Sets ``t_``, ``best_score_`` and
    ``scores_`` (mean score per threshold).
    """

    def __init__(self, method="a2", thresholds=None, a1=3, a2=1, metric="f1"):
        self.method = method
        self.thresholds = thresholds
        self.a1 = a1
        self.a2 = a2
        self.metric = metric

    def fit(self, X, y):
        images, _ = check_images(X)
        masks = _check_masks(y, len(images))
        method = canonical_method(self.method)
        if method not in ("a1", "a2", "a3", "a4", "bradley"):
            raise ValueError(f"threshold search needs a t-driven method, got {self.method!r}")
        if self.metric not in METRIC_KEYS:
            raise ValueError(f"unknown metric {self.metric!r}")
        thresholds = tuple(self.thresholds) if self.thresholds is not None else DEFAULT_THRESHOLDS
        space = SearchSpace(thresholds=thresholds, a1_values=(self.a1,), a2_values=(self.a2,),
                            methods=(method,), metric=self.metric)
        totals = np.zeros(len(thresholds))
        for img, gt in zip(images, masks):
            reports = evaluate_space(img, gt, space, method)
            if len(reports) != len(thresholds):
                raise ValueError(f"window radius is 0 for an image of shape {img.shape}")
            totals += [getattr(r, self.metric) for r in reports]
        means = totals / len(images)
        signed = -means if self.metric == "mse" else means
        best = int(np.argmax(signed))
        self.method_ = method
        self.scores_ = dict(zip(thresholds, means.tolist()))
        self.t_ = thresholds[best]
        self.best_score_ = float(means[best])
        return self

    def _binarize(self, img):
        params = self._params(self.t_)
        if self.method_ == "bradley":
            return bradley(img, params)
        return flat(img, self.method_, params)
