"""Toy dataset generation and loading of external image/ground-truth pairs.

Toy images are small (8x8 or 9x9) two-level pictures of a geometric motif
(foreground dark, background bright) degraded by a sequence of
perturbations.  Intensities live on a 0.01 grid, so generation works in
integer hundredths and every step is exact.

Each perturbation touches exactly ``round(coverage * N)`` pixels and changes
each of them by a magnitude in ``[0.01, 0.01 + variability]``; the smallest
and largest magnitudes are always attained.  The same measurement function,
:func:`measure_perturbation`, checks the generated images:

* coverage: fraction of pixels whose intensity changed by more than 0.005;
* variability: max minus min absolute change over those pixels.

Perturbation families:

gamma0  contrast: a compact patch is pulled toward mid-gray by a random
        per-pixel factor, lowering the local fg/bg contrast
gamma1  lighting: a planar shadow along a random direction; the pixels on the
        lit-away side darken, more so further along the gradient
gamma2  additive noise: random pixels, random sign, uniform magnitude
gamma3  structured motifs: a 2x2 or 3x3 tile with a fixed per-position
        priority is repeated over the image; selected pixels are pushed
        toward the opposite class with a magnitude set by tile position
gamma4  smoothed borders: pixels next to the fg/bg edge are pushed toward
        the other class in proportion to a 3x3 box blur of the base shape
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .binarize import otsu, otsu_threshold
from .image import load_gray, save_binary, save_gray
from .metrics import confusion, scalar_metrics

__all__ = [
    "SplitMix64",
    "PERTURBATION_KINDS",
    "PerturbationSpec",
    "ToyImageSpec",
    "TOY_TABLE",
    "toy_specs",
    "toy_generate",
    "toy_trace",
    "measure_perturbation",
    "write_toy_dataset",
    "load_pairs",
    "otsu_select",
]

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood), 64-bit state.

    Constants: increment 0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9
    and 0x94D049BB133111EB, shifts 30/27/31.  Floats take the top 53 bits.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        return int(self.random() * n)

    def uniform_array(self, shape) -> np.ndarray:
        size = int(np.prod(shape))
        return np.array([self.random() for _ in range(size)], dtype=np.float64).reshape(shape)

    def permutation(self, n: int) -> np.ndarray:
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.int64)


PERTURBATION_KINDS = ("gamma0", "gamma1", "gamma2", "gamma3", "gamma4")


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    coverage: float
    variability: float

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation {self.kind!r}")
        for name in ("coverage", "variability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


# coverage / intensity variability per toy image
TOY_TABLE = {
    "a": (("gamma0", 0.87, 0.20), ("gamma3", 0.70, 0.30)),
    "b": (("gamma0", 0.89, 0.15), ("gamma3", 0.50, 0.20)),
    "c": (("gamma0", 0.10, 0.35), ("gamma1", 0.90, 0.03)),
    "d": (("gamma1", 0.23, 0.10), ("gamma4", 0.16, 0.20)),
    "e": (("gamma0", 0.18, 0.05), ("gamma1", 0.88, 0.20)),
    "f": (("gamma0", 0.07, 0.05), ("gamma1", 0.62, 0.01), ("gamma3", 0.26, 0.03)),
    "g": (("gamma1", 0.64, 0.03), ("gamma3", 0.28, 0.03)),
    "h": (("gamma0", 0.18, 0.05), ("gamma1", 0.88, 0.20)),
}

TOY_SHAPES = {
    "a": "disk", "b": "cross", "c": "checker", "d": "ring",
    "e": "ell", "f": "bars", "g": "band", "h": "block",
}


@dataclass(frozen=True)
class ToyImageSpec:
    label: str
    rows: int
    cols: int
    shape: str
    perturbations: tuple = ()
    seed: int = 0
    fg_level: float = 0.25
    bg_level: float = 0.75
    # fraction of GT pixels flipped (robustness variant); 0 keeps the GT clean
    gt_noise: float = 0.0

    def __post_init__(self):
        if self.rows not in (8, 9) or self.cols not in (8, 9):
            raise ValueError(f"toy images are 8x8 or 9x9, got {self.rows}x{self.cols}")
        perts = tuple(p if isinstance(p, PerturbationSpec) else PerturbationSpec(*p)
                      for p in self.perturbations)
        object.__setattr__(self, "perturbations", perts)
        for name in ("fg_level", "bg_level", "gt_noise"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")

    @property
    def name(self) -> str:
        return f"toy_{self.label}"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ToyImageSpec":
        d = dict(d)
        d["perturbations"] = tuple(PerturbationSpec(**p) if isinstance(p, dict) else PerturbationSpec(*p)
                                   for p in d.get("perturbations", ()))
        return cls(**d)


def toy_specs(seed: int = 2021) -> list:
    """Specs for images a-h; odd labels (a, c, e, g) are 9x9, the rest 8x8."""
    rng = SplitMix64(seed)
    specs = []
    for i, label in enumerate("abcdefgh"):
        size = 9 if i % 2 == 0 else 8
        specs.append(ToyImageSpec(label=label, rows=size, cols=size, shape=TOY_SHAPES[label],
                                  perturbations=TOY_TABLE[label], seed=rng.next_u64()))
    return specs


def _base_shape(shape, rows, cols) -> np.ndarray:
    r, c = np.mgrid[0:rows, 0:cols]
    cy, cx = (rows - 1) / 2.0, (cols - 1) / 2.0
    d2 = (r - cy) ** 2 + (c - cx) ** 2
    if shape == "disk":
        m = d2 <= (min(rows, cols) / 3.0) ** 2
    elif shape == "cross":
        m = (np.abs(r - cy) <= 1.0) | (np.abs(c - cx) <= 1.0)
    elif shape == "checker":
        m = (((r // 2) + (c // 2)) % 2 == 0) & (r >= 1) & (c >= 1) & (r < rows - 1) & (c < cols - 1)
    elif shape == "ring":
        m = (d2 <= (min(rows, cols) / 2.4) ** 2) & (d2 >= (min(rows, cols) / 6.0) ** 2)
    elif shape == "ell":
        m = ((c >= 1) & (c <= 3) & (r >= 1) & (r < rows - 1)) | ((r >= rows - 4) & (r < rows - 1) & (c >= 1) & (c < cols - 1))
    elif shape == "bars":
        m = ((c % 3) == 1) & (r >= 1) & (r < rows - 1)
    elif shape == "band":
        m = np.abs(r - c) <= 1
    elif shape == "block":
        m = (r >= 2) & (r < rows - 1) & (c >= 1) & (c < cols - 3)
    else:
        raise ValueError(f"unknown base shape {shape!r}")
    return m.astype(np.uint8)


def measure_perturbation(before, after):
    """``(coverage, variability)`` of the change from ``before`` to ``after``."""
    delta = np.rint((np.asarray(after, dtype=np.float64) - np.asarray(before, dtype=np.float64)) * 100.0)
    changed = np.abs(delta) > 0.5
    coverage = float(np.count_nonzero(changed)) / delta.size
    if not changed.any():
        return coverage, 0.0
    mags = np.abs(delta[changed])
    return coverage, float(mags.max() - mags.min()) / 100.0


def _select(priority, k):
    """Indices of the k smallest priorities (flattened)."""
    return np.argsort(priority.ravel(), kind="stable")[:k]


def _perturb(cur, gt, spec: PerturbationSpec, rng: SplitMix64):
    rows, cols = cur.shape
    n = cur.size
    k = int(round(spec.coverage * n))
    if k == 0:
        return cur.copy()
    if spec.variability > 0 and k < 2:
        raise ValueError(f"infeasible {spec.kind}: coverage {spec.coverage} selects a single "
                         f"pixel, which cannot carry variability {spec.variability}")
    jitter = rng.uniform_array(cur.shape) * 1e-3
    r, c = np.mgrid[0:rows, 0:cols].astype(np.float64)

    if spec.kind == "gamma0":
        sy, sx = rng.randbelow(rows), rng.randbelow(cols)
        priority = np.hypot(r - sy, c - sx) + jitter
        strength = rng.uniform_array(cur.shape)
        sign = np.where(cur < 50, 1, -1)
    elif spec.kind == "gamma1":
        theta = 2 * np.pi * rng.random()
        proj = r * np.sin(theta) + c * np.cos(theta)
        priority = -(proj + jitter)
        strength = proj + jitter
        sign = -np.ones(cur.shape, dtype=np.int64)
    elif spec.kind == "gamma2":
        priority = rng.uniform_array(cur.shape)
        strength = rng.uniform_array(cur.shape)
        sign = np.where(rng.uniform_array(cur.shape) < 0.5, -1, 1)
    elif spec.kind == "gamma3":
        period = 2 + rng.randbelow(2)
        tile_rank = rng.permutation(period * period).reshape(period, period).astype(np.float64)
        motif = tile_rank[(r % period).astype(int), (c % period).astype(int)]
        priority = motif + jitter
        strength = motif + jitter
        sign = np.where(gt == 1, 1, -1)
    else:  # gamma4
        from scipy.ndimage import uniform_filter

        blurred = uniform_filter(gt.astype(np.float64), size=3, mode="nearest")
        edge = np.abs(blurred - gt)
        eligible = edge > 0
        if np.count_nonzero(eligible) < k:
            raise ValueError(f"infeasible gamma4: coverage {spec.coverage} needs {k} border pixels, "
                             f"the shape has {np.count_nonzero(eligible)}")
        priority = np.where(eligible, -edge - jitter, np.inf)
        strength = edge + jitter
        sign = np.where(gt == 1, 1, -1)

    idx = _select(priority, k)
    s = strength.ravel()[idx]
    span = s.max() - s.min()
    u = (s - s.min()) / span if span > 0 else np.linspace(0.0, 1.0, k)
    mags = 1 + np.rint(u * spec.variability * 100.0).astype(np.int64)
    out = cur.copy().ravel()
    out[idx] = np.clip(out[idx] + sign.ravel()[idx] * mags, 0, 100)
    return out.reshape(cur.shape)


def _generate(spec: ToyImageSpec):
    rng = SplitMix64(spec.seed)
    gt = _base_shape(spec.shape, spec.rows, spec.cols)
    fg = int(round(spec.fg_level * 100))
    bg = int(round(spec.bg_level * 100))
    cur = np.where(gt == 1, fg, bg).astype(np.int64)
    trace = []
    for p in spec.perturbations:
        nxt = _perturb(cur, gt, p, rng)
        coverage, variability = measure_perturbation(cur / 100.0, nxt / 100.0)
        if abs(coverage - p.coverage) > 0.02 or abs(variability - p.variability) > 0.02 + 1e-9:
            raise ValueError(f"infeasible {p.kind} for image {spec.label}: measured coverage "
                             f"{coverage:.3f}, variability {variability:.3f}")
        trace.append((p.kind, coverage, variability))
        cur = nxt
    if spec.gt_noise > 0:
        flips = rng.permutation(gt.size)[: int(round(spec.gt_noise * gt.size))]
        gt = gt.copy().ravel()
        gt[flips] ^= 1
        gt = gt.reshape(spec.rows, spec.cols)
    return cur / 100.0, gt, trace


def toy_generate(spec: ToyImageSpec):
    """Deterministic ``(gray, gt)`` pair for ``spec``."""
    gray, gt, _ = _generate(spec)
    return gray, gt


def toy_trace(spec: ToyImageSpec) -> list:
    """Measured ``(kind, coverage, variability)`` of every perturbation step."""
    return _generate(spec)[2]


def write_toy_dataset(specs, out_dir) -> list:
    """Write ``name.pgm``, ``name_gt.pgm`` and ``name_spec.json`` per spec."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for spec in specs:
        gray, gt = toy_generate(spec)
        save_gray(gray, out / f"{spec.name}.pgm", maxval=100)
        save_binary(gt, out / f"{spec.name}_gt.pgm")
        (out / f"{spec.name}_spec.json").write_text(spec.to_json() + "\n")
        names.append(spec.name)
    return names


_IMAGE_EXTS = (".pgm", ".png")


def load_pairs(directory) -> list:
    """Load ``name.{pgm,png}`` / ``name_gt.{pgm,png}`` pairs, sorted by name.

    Orphan images and size mismatches are logged and skipped.  Ground truths
    are binarized at 0.5.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(os.fspath(directory))
    files = {p.stem: p for p in sorted(directory.iterdir()) if p.suffix.lower() in _IMAGE_EXTS}
    pairs = []
    for stem in sorted(files):
        if stem.endswith("_gt"):
            continue
        gt_path = files.get(f"{stem}_gt")
        if gt_path is None:
            log.warning("skipping %s: no ground truth %s_gt.{pgm,png}", files[stem].name, stem)
            continue
        img = load_gray(files[stem])
        gt = (load_gray(gt_path) >= 0.5).astype(np.uint8)
        if img.shape != gt.shape:
            log.warning("skipping %s: image %s and ground truth %s differ in size",
                        stem, img.shape, gt.shape)
            continue
        pairs.append((img, gt, stem))
    return pairs


def otsu_select(pairs, min_f1: float = 0.7) -> list:
    """Keep pairs whose Otsu binarization reaches ``f1 >= min_f1``."""
    kept = []
    for pair in pairs:
        img, gt = pair[0], pair[1]
        if otsu_threshold(img)[1]:
            continue
        f1 = scalar_metrics(confusion(otsu(img), gt))[3]
        if f1 >= min_f1:
            kept.append(pair)
    return kept
