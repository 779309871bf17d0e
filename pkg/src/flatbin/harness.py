"""Experimental protocol: exhaustive grid search, FLAT-vs-Bradley voting,
throughput benchmark and CSV/JSON reporting."""
from __future__ import annotations

import csv
import io
import json
import os
import platform
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregators import AggregatorKind
from .binarize import (
    BaselineParams,
    BinarizeParams,
    bradley,
    flat,
    niblack,
    otsu,
    sauvola,
    window_mean_std,
    window_means,
)
from .image import check_gray
from .integral import fuzzy_integral_image, sat
from .metrics import METRIC_KEYS, EvalReport, evaluate

__all__ = [
    "METHODS",
    "FLAT_METHODS",
    "REFERENCE_FPS",
    "DEFAULT_THRESHOLDS",
    "canonical_method",
    "run_method",
    "SearchSpace",
    "ImageResult",
    "evaluate_space",
    "grid_search",
    "VoteTally",
    "vote",
    "compare",
    "format_vote_table",
    "FpsReport",
    "bench_fps",
    "report",
    "write_csv",
    "read_csv",
    "summarize",
]

FLAT_METHODS = ("a1", "a2", "a3", "a4")
METHODS = FLAT_METHODS + ("bradley", "niblack", "sauvola", "otsu")
REFERENCE_FPS = 1100.0
DEFAULT_THRESHOLDS = tuple(round(0.01 * i, 2) for i in range(1, 101))
CSV_FIELDS = ("image", "method", "t", "a1", "a2", "n_a") + METRIC_KEYS


def canonical_method(name) -> str:
    key = str(name).strip().lower()
    if key.startswith("flat_"):
        key = key[5:]
    if key in METHODS:
        return key
    try:
        return AggregatorKind.parse(key).label
    except ValueError:
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}") from None


def _uses_t(method):
    return method in FLAT_METHODS or method == "bradley"


def _uses_window(method):
    return method != "otsu"


def run_method(img, method, params: BinarizeParams, baseline: BaselineParams = BaselineParams()):
    """Binarize ``img`` with any supported method."""
    method = canonical_method(method)
    if method in FLAT_METHODS:
        return flat(img, method, params)
    if method == "bradley":
        return bradley(img, params)
    if method == "niblack":
        return niblack(img, params, k=baseline.niblack_k)
    if method == "sauvola":
        return sauvola(img, params, k=baseline.sauvola_k, r=baseline.sauvola_r_unit)
    return otsu(img)


@dataclass
class SearchSpace:
    thresholds: tuple = DEFAULT_THRESHOLDS
    a1_values: tuple = tuple(range(1, 10))
    a2_values: tuple = (1,)
    methods: tuple = ("a2",)
    metric: str = "f1"

    def __post_init__(self):
        self.thresholds = tuple(float(t) for t in self.thresholds)
        self.a1_values = tuple(int(a) for a in self.a1_values)
        self.a2_values = tuple(int(a) for a in self.a2_values)
        self.methods = tuple(canonical_method(m) for m in self.methods)
        if not (self.thresholds and self.a1_values and self.a2_values and self.methods):
            raise ValueError("search space must be nonempty in every dimension")
        if any(not 0.0 <= t <= 1.0 for t in self.thresholds):
            raise ValueError("thresholds must lie in [0, 1]")
        if any(a < 1 for a in self.a1_values + self.a2_values):
            raise ValueError("window divisors must be >= 1")
        if self.metric not in METRIC_KEYS:
            raise ValueError(f"unknown metric {self.metric!r}")

    def configs(self, shape, method):
        """Valid ``(t, a1, a2, n_a)`` tuples for one image; ``None`` marks unused fields."""
        method = canonical_method(method)
        ts = self.thresholds if _uses_t(method) else (None,)
        if not _uses_window(method):
            return [(t, None, None, None) for t in ts]
        out = []
        for a1 in self.a1_values:
            for a2 in self.a2_values:
                na = min(shape) // (a1 * a2)
                if not 1 <= na <= min(shape):
                    continue
                out.extend((t, a1, a2, na) for t in ts)
        return out


def _params_dict(t, a1, a2, na):
    return {"t": t, "a1": a1, "a2": a2, "n_a": na}


def evaluate_space(img, gt, space: SearchSpace, method, name="",
                   baseline: BaselineParams = BaselineParams()):
    """EvalReport for every valid configuration of ``method`` on one pair.

    Window statistics are computed once per radius and reused across the
    threshold sweep; the decision rule is the one in :mod:`flatbin.binarize`.
    """
    img = check_gray(img)
    method = canonical_method(method)
    configs = space.configs(img.shape, method)
    if method in FLAT_METHODS:
        table = fuzzy_integral_image(img, method)[1]
    elif method == "bradley":
        table = sat(img)
    cache = {}
    reports = []
    for t, a1, a2, na in configs:
        if method in FLAT_METHODS or method == "bradley":
            if na not in cache:
                cache[na] = window_means(table, na)
            mean, tol = cache[na]
            pred = (img <= mean * (1.0 - t) + tol).astype(np.uint8)
        elif method in ("niblack", "sauvola"):
            if na not in cache:
                cache[na] = window_mean_std(img, na)
            mean, std, tol = cache[na]
            if method == "niblack":
                thr = mean + baseline.niblack_k * std
            else:
                thr = mean * (1.0 + baseline.sauvola_k * (std / baseline.sauvola_r_unit - 1.0))
            pred = (img <= thr + tol).astype(np.uint8)
        else:
            pred = otsu(img)
        reports.append(evaluate(pred, gt, method=method, params=_params_dict(t, a1, a2, na), image=name))
    return reports


def _rank_key(report: EvalReport, metric):
    score = getattr(report, metric)
    if metric == "mse":
        score = -score
    p = report.params

    def low(v):
        return -1 if v is None else v

    return (-score, low(p["t"]), low(p["n_a"]), low(p["a1"]), low(p["a2"]))


@dataclass
class ImageResult:
    image: str
    method: str
    best: EvalReport | None
    error: str | None = None
    evaluations: list = field(default_factory=list)


def grid_search(pairs, space: SearchSpace, method=None, keep_all=False) -> list:
    """Per-image optimum of ``space.metric`` over every configuration.

    Ties go to the lower ``t``, then the smaller ``n_a`` (then ``a1``, ``a2``).
    ``pairs`` holds ``(img, gt)`` or ``(img, gt, name)`` tuples.
    """
    methods = (canonical_method(method),) if method is not None else space.methods
    if not pairs:
        raise ValueError("grid search needs at least one image pair")
    results = []
    for i, pair in enumerate(pairs):
        img, gt = pair[0], pair[1]
        name = pair[2] if len(pair) > 2 else f"image_{i}"
        for m in methods:
            reports = evaluate_space(img, gt, space, m, name=name)
            if not reports:
                results.append(ImageResult(name, m, None, error="no valid configuration for image "
                                           f"of shape {np.shape(img)}"))
                continue
            best = min(reports, key=lambda r: _rank_key(r, space.metric))
            results.append(ImageResult(name, m, best, evaluations=reports if keep_all else []))
    return results


@dataclass(frozen=True)
class VoteTally:
    theta: float
    g_flat: int
    g_bradley: int


def vote(ssim_pairs, theta) -> VoteTally:
    """Count strict SSIM wins that also clear ``theta``; pairs are ``(flat, bradley)``."""
    g_flat = g_bradley = 0
    for pair in ssim_pairs:
        if len(pair) != 2:
            raise ValueError("each entry must be an aligned (ssim_flat, ssim_bradley) pair")
        s_flat, s_brad = pair
        if s_flat >= theta and s_flat > s_brad:
            g_flat += 1
        elif s_brad >= theta and s_brad > s_flat:
            g_bradley += 1
    return VoteTally(float(theta), g_flat, g_bradley)


def compare(pairs, space: SearchSpace, kinds=FLAT_METHODS, thetas=(0.90, 0.55, 0.00)) -> dict:
    """Pairwise FLAT-vs-Bradley tallies under identical configurations.

    Returns ``{kind: [VoteTally per theta]}``.
    """
    bradley_scores = {}
    per_kind = {canonical_method(k): [] for k in kinds}
    for i, pair in enumerate(pairs):
        img, gt = pair[0], pair[1]
        name = pair[2] if len(pair) > 2 else f"image_{i}"
        brad = {(r.params["t"], r.params["a1"], r.params["a2"]): r.ssim
                for r in evaluate_space(img, gt, space, "bradley", name=name)}
        bradley_scores[name] = brad
        for kind in per_kind:
            for r in evaluate_space(img, gt, space, kind, name=name):
                key = (r.params["t"], r.params["a1"], r.params["a2"])
                per_kind[kind].append((r.ssim, brad[key]))
    return {kind: [vote(scores, th) for th in thetas] for kind, scores in per_kind.items()}


def format_vote_table(table: dict) -> str:
    thetas = [v.theta for v in next(iter(table.values()))]
    head = "method | " + " | ".join(f"g_flat  g_bradley (SSIM>={th:.2f})" for th in thetas)
    lines = [head, "-" * len(head)]
    for kind, tallies in table.items():
        cells = " | ".join(f"{v.g_flat:6d}  {v.g_bradley:9d}{' ' * 13}" for v in tallies)
        lines.append(f"F_{kind.upper():4s} | {cells}")
    return "\n".join(lines)


@dataclass
class FpsReport:
    fps: float
    runs: list
    n_images: int
    method: str
    n_jobs: int
    machine: str
    reference_fps: float = REFERENCE_FPS

    def describe(self) -> str:
        return (f"{self.method}: {self.fps:.1f} fps (median of {len(self.runs)} runs, "
                f"{self.n_images} images, jobs={self.n_jobs}) on {self.machine}; "
                f"reference {self.reference_fps:.0f} fps")


def _machine():
    return f"{platform.machine()} {platform.processor() or platform.system()} " \
           f"python {platform.python_version()} cpus={os.cpu_count()}"


def bench_fps(images, method="a2", params: BinarizeParams = BinarizeParams(t=0.5, a1=3, a2=1),
              repetitions=5, warmup=1, n_jobs=1) -> FpsReport:
    """Images per second for the full pipeline (table + binarization), median over runs."""
    images = [check_gray(im) for im in images]
    if not images:
        raise ValueError("benchmark needs at least one image")
    method = canonical_method(method)

    def one(im):
        return run_method(im, method, params)

    def run_all():
        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                list(pool.map(one, images))
        else:
            for im in images:
                one(im)

    for _ in range(max(warmup, 0)):
        run_all()
    runs = []
    for _ in range(max(repetitions, 1)):
        start = time.perf_counter()
        run_all()
        elapsed = max(time.perf_counter() - start, 1e-9)
        runs.append(len(images) / elapsed)
    return FpsReport(statistics.median(runs), runs, len(images), method, n_jobs, _machine())


def _row(r: EvalReport) -> dict:
    p = r.params
    row = {"image": r.image, "method": r.method,
           "t": p.get("t"), "a1": p.get("a1"), "a2": p.get("a2"), "n_a": p.get("n_a")}
    row.update(r.metrics())
    return row


def _sort_key(r: EvalReport):
    p = r.params

    def k(v):
        return (v is not None, v if v is not None else 0)

    return (r.image, r.method, k(p.get("t")), k(p.get("a1")), k(p.get("a2")))


def write_csv(results, path):
    results = sorted(results, key=_sort_key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                         for k, v in _row(r).items()})
    Path(path).write_text(buf.getvalue())


def read_csv(path) -> list:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            def num(key, cast):
                return None if row[key] == "" else cast(row[key])

            params = {"t": num("t", float), "a1": num("a1", int), "a2": num("a2", int),
                      "n_a": num("n_a", int)}
            metrics = {k: float(row[k]) for k in METRIC_KEYS}
            out.append(EvalReport(**metrics, method=row["method"], image=row["image"], params=params))
    return out


def summarize(results) -> dict:
    """Mean and population std of every metric, per method."""
    by_method = {}
    for r in results:
        by_method.setdefault(r.method, []).append(r)
    summary = {}
    for method in sorted(by_method):
        # fixed order so the float reduction does not depend on input order
        rs = sorted(by_method[method], key=_sort_key)
        summary[method] = {"n": len(rs)}
        for k in METRIC_KEYS:
            vals = np.array([getattr(r, k) for r in rs], dtype=np.float64)
            summary[method][k] = {"mean": float(vals.mean()), "std": float(vals.std())}
    return summary


def report(results, out_dir, stem="results") -> tuple:
    """Write ``<stem>.csv`` (one row per evaluation) and ``<stem>_summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}_summary.json"
    write_csv(results, csv_path)
    doc = {"std": "population", "methods": summarize(results)}
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
