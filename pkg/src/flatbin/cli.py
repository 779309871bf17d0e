"""Command line interface.

Exit status: 0 on success, 1 on input errors (bad arguments, unreadable or
malformed files, invalid parameters), 2 on internal errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .binarize import BaselineParams, BinarizeParams
from .datasets import load_pairs, otsu_select, toy_specs, write_toy_dataset
from .harness import (
    DEFAULT_THRESHOLDS,
    FLAT_METHODS,
    METHODS,
    REFERENCE_FPS,
    SearchSpace,
    bench_fps,
    compare,
    format_vote_table,
    grid_search,
    report,
    run_method,
)
from .image import ImageFormatError, check_binary, load_gray, save_binary
from .integral import fuzzy_integral_image
from .metrics import METRIC_KEYS, evaluate

log = logging.getLogger("flatbin")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p, method_default="a2", methods=METHODS):
    p.add_argument("--method", default=method_default, choices=methods)
    p.add_argument("--t", type=float, default=0.5, help="sensitivity in [0, 1]")
    p.add_argument("--a1", type=int, default=3)
    p.add_argument("--a2", type=int, default=1)
    p.add_argument("--theta", type=float, action="append", default=None,
                   help="SSIM cutoff for voting; repeatable")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _emit(rows, fmt, path=None):
    """Write a list of flat dicts as CSV/JSON to ``path`` or stdout."""
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        keys = list(rows[0]) if rows else []
        lines = [",".join(keys)] + [",".join("" if r[k] is None else str(r[k]) for k in keys) for r in rows]
        text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _out_dir(args, default):
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_binarize(args):
    img = load_gray(args.input)
    params = BinarizeParams(t=args.t, a1=args.a1, a2=args.a2)
    baseline = BaselineParams(niblack_k=args.niblack_k, sauvola_k=args.sauvola_k, sauvola_r=args.sauvola_r)
    out = run_method(img, args.method, params, baseline)
    if args.out and not Path(args.out).is_dir():
        target = Path(args.out)
    else:
        target = Path(args.out or ".") / f"{Path(args.input).stem}_{args.method}.pgm"
    save_binary(out, target)
    print(target)


def cmd_fuzzy_image(args):
    img = load_gray(args.input)
    S, F = fuzzy_integral_image(img, args.method)
    out = _out_dir(args, ".")
    stem = Path(args.input).stem
    if args.format == "json":
        target = out / f"{stem}_F_{args.method}.json"
        target.write_text(json.dumps({"method": args.method, "shape": list(F.shape),
                                      "S": S.tolist(), "F": F.tolist()}) + "\n")
    else:
        target = out / f"{stem}_F_{args.method}.csv"
        np.savetxt(target, F, delimiter=",", fmt="%.17g")
    print(target)


def _load_dataset(args):
    pairs = load_pairs(args.data)
    if args.min_f1 is not None:
        pairs = otsu_select(pairs, args.min_f1)
    if not pairs:
        raise InputError(f"no usable image/ground-truth pairs in {args.data}")
    return pairs


def _space(args, methods):
    return SearchSpace(thresholds=args.thresholds, a1_values=args.a1_values or (args.a1,),
                       a2_values=args.a2_values or (args.a2,), methods=methods, metric=args.metric)


def cmd_grid_search(args):
    pairs = _load_dataset(args)
    space = _space(args, (args.method,))
    results = grid_search(pairs, space, keep_all=True)
    out = _out_dir(args, "grid_search_out")
    every = [r for res in results for r in res.evaluations]
    report(every, out, stem="grid")
    rows = []
    for res in results:
        row = {"image": res.image, "method": res.method, "error": res.error}
        params = res.best.params if res.best else {"t": None, "a1": None, "a2": None, "n_a": None}
        row.update(params)
        row.update(res.best.metrics() if res.best else {k: None for k in METRIC_KEYS})
        rows.append(row)
    _emit(rows, args.format, out / f"best.{args.format}")
    _emit(rows, args.format)


def cmd_compare(args):
    pairs = _load_dataset(args)
    space = _space(args, ("bradley",))
    thetas = args.theta or (0.90, 0.55, 0.00)
    table = compare(pairs, space, kinds=FLAT_METHODS, thetas=thetas)
    print(format_vote_table(table))
    if args.out:
        out = _out_dir(args, args.out)
        rows = [{"method": k, "theta": v.theta, "g_flat": v.g_flat, "g_bradley": v.g_bradley}
                for k, tallies in table.items() for v in tallies]
        _emit(rows, args.format, out / f"votes.{args.format}")


def cmd_toy_gen(args):
    out = _out_dir(args, "toy")
    for name in write_toy_dataset(toy_specs(args.seed), out):
        print(out / name)


def cmd_bench(args):
    if args.images:
        images = [img for img, _, _ in load_pairs(args.images)]
        if not images:
            raise InputError(f"no images in {args.images}")
    else:
        rng = np.random.default_rng(args.seed)
        images = [rng.random((200, 200)) for _ in range(10)]
    params = BinarizeParams(t=args.t, a1=args.a1, a2=args.a2)
    rep = bench_fps(images, args.method, params, repetitions=args.repetitions, n_jobs=args.jobs)
    print(rep.describe())
    print(f"reference: ~{REFERENCE_FPS:.0f} fps")
    if args.out:
        out = _out_dir(args, args.out)
        (out / "bench.json").write_text(json.dumps(rep.__dict__, indent=2, sort_keys=True) + "\n")


def cmd_metrics(args):
    pred = check_binary((load_gray(args.pred) >= 0.5).astype(np.uint8))
    gt = check_binary((load_gray(args.gt) >= 0.5).astype(np.uint8))
    rep = evaluate(pred, gt)
    _emit([rep.metrics()], args.format, args.out)


def build_parser():
    parser = _Parser(prog="flatbin", description="Fuzzy local adaptive thresholding toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("binarize", help="binarize one image")
    p.add_argument("input")
    _common(p)
    p.add_argument("--niblack-k", type=float, default=0.0)
    p.add_argument("--sauvola-k", type=float, default=0.2)
    p.add_argument("--sauvola-r", type=float, default=128.0)
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("fuzzy-image", help="write the fuzzy integral image of one image")
    p.add_argument("input")
    _common(p, methods=FLAT_METHODS)
    p.set_defaults(func=cmd_fuzzy_image)

    for name, func, method_default, help_ in (
        ("grid-search", cmd_grid_search, "a2", "per-image optimum over a parameter grid"),
        ("compare", cmd_compare, "a2", "FLAT vs Bradley SSIM voting"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("data", help="directory of name.pgm / name_gt.pgm pairs")
        _common(p, method_default)
        p.add_argument("--thresholds", type=_float_list, default=DEFAULT_THRESHOLDS)
        p.add_argument("--a1-values", type=_int_list, default=None)
        p.add_argument("--a2-values", type=_int_list, default=None)
        p.add_argument("--metric", choices=METRIC_KEYS, default="f1")
        p.add_argument("--min-f1", type=float, default=None, help="Otsu F1 filter for the pairs")
        p.set_defaults(func=func)

    p = sub.add_parser("toy-gen", help="generate the toy dataset")
    p.add_argument("--seed", type=int, default=2021)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_toy_gen)

    p = sub.add_parser("bench", help="throughput of the full pipeline")
    _common(p)
    p.add_argument("--images", default=None, help="directory of images (default: ten random 200x200)")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("metrics", help="score a predicted mask against a ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (InputError, ImageFormatError, ValueError, OSError) as exc:
        print(f"flatbin: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"flatbin: internal error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
