"""flatbin: fuzzy local adaptive thresholding with fuzzy integral images."""
from __future__ import annotations

__version__ = "0.1.0"

from .aggregators import AggregatorKind, aggregate, fuzzy_aggregate, mu_uniform
from .binarize import (
    BaselineParams,
    BinarizeParams,
    bradley,
    flat,
    flat_binarize,
    niblack,
    otsu,
    otsu_threshold,
    sauvola,
    window_radius,
)
from .datasets import ToyImageSpec, load_pairs, toy_generate, toy_specs, write_toy_dataset
from .estimators import (
    BradleyBinarizer,
    FlatBinarizer,
    FuzzyIntegralTransformer,
    NiblackBinarizer,
    OptimalThresholdBinarizer,
    OtsuBinarizer,
    SauvolaBinarizer,
)
from .harness import SearchSpace, bench_fps, compare, grid_search, report, vote
from .image import ImageFormatError, load_gray, save_binary, save_gray
from .integral import fuzzy_integral_image, sat
from .metrics import EvalReport, evaluate, mse, ssim

__all__ = [
    "__version__",
    "AggregatorKind", "aggregate", "fuzzy_aggregate", "mu_uniform",
    "BaselineParams", "BinarizeParams", "bradley", "flat", "flat_binarize", "niblack", "otsu",
    "otsu_threshold", "sauvola", "window_radius",
    "ToyImageSpec", "load_pairs", "toy_generate", "toy_specs", "write_toy_dataset",
    "BradleyBinarizer", "FlatBinarizer", "FuzzyIntegralTransformer", "NiblackBinarizer",
    "OptimalThresholdBinarizer", "OtsuBinarizer", "SauvolaBinarizer",
    "SearchSpace", "bench_fps", "compare", "grid_search", "report", "vote",
    "ImageFormatError", "load_gray", "save_binary", "save_gray",
    "fuzzy_integral_image", "sat",
    "EvalReport", "evaluate", "mse", "ssim",
]
