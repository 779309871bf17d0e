import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatbin.binarize import BinarizeParams, bradley, flat
from flatbin.datasets import toy_generate, toy_specs
from flatbin.harness import (
    CSV_FIELDS,
    DEFAULT_THRESHOLDS,
    SearchSpace,
    bench_fps,
    canonical_method,
    compare,
    format_vote_table,
    grid_search,
    read_csv,
    report,
    run_method,
    summarize,
    VoteTally,
    vote,
    write_csv,
)
from flatbin.metrics import EvalReport, evaluate


def exhaustive_best(img, gt, method, thresholds, a1s, metric="f1"):
    """Independent re-evaluation through the public binarizers."""
    best = None
    for t, a1 in itertools.product(thresholds, a1s):
        p = BinarizeParams(t=t, a1=a1)
        pred = bradley(img, p) if method == "bradley" else flat(img, method, p)
        score = getattr(evaluate(pred, gt), metric)
        na = min(img.shape) // a1
        key = (-score, t, na)
        if best is None or key < best[0]:
            best = (key, t, a1, score)
    return best


def toy_pair(i=1):
    img, gt = toy_generate(toy_specs()[i])
    return img, gt, f"toy_{i}"


def test_default_threshold_grid():
    assert len(DEFAULT_THRESHOLDS) == 100
    assert DEFAULT_THRESHOLDS[0] == 0.01 and DEFAULT_THRESHOLDS[-1] == 1.0


def test_canonical_method():
    assert canonical_method("flat_A2") == "a2"
    assert canonical_method("Bradley") == "bradley"
    with pytest.raises(ValueError):
        canonical_method("canny")


def test_search_space_validation():
    with pytest.raises(ValueError):
        SearchSpace(thresholds=())
    with pytest.raises(ValueError):
        SearchSpace(thresholds=(1.5,))
    with pytest.raises(ValueError):
        SearchSpace(a1_values=(0,))
    with pytest.raises(ValueError):
        SearchSpace(metric="auc")


def test_configs_skip_zero_radius():
    space = SearchSpace(thresholds=(0.5,), a1_values=(1, 4, 9))
    assert [c[3] for c in space.configs((8, 8), "a2")] == [8, 2]
    assert space.configs((8, 8), "otsu") == [(None, None, None, None)]
    assert [c[0] for c in space.configs((8, 8), "niblack")] == [None, None]


def test_single_config():
    img, gt, name = toy_pair()
    space = SearchSpace(thresholds=(0.3,), a1_values=(2,))
    (res,) = grid_search([(img, gt, name)], space)
    assert res.best.params == {"t": 0.3, "a1": 2, "a2": 1, "n_a": 4}


@pytest.mark.parametrize("method", ["a2", "a3", "bradley"])
def test_grid_search_matches_exhaustive(method):
    img, gt, name = toy_pair()
    space = SearchSpace(a1_values=(1, 2), methods=(method,))
    (res,) = grid_search([(img, gt, name)], space)
    _, t, a1, score = exhaustive_best(img, gt, method, DEFAULT_THRESHOLDS, (1, 2))
    assert (res.best.params["t"], res.best.params["a1"]) == (t, a1)
    assert res.best.f1 == score


def test_grid_search_mse_minimized():
    img, gt, name = toy_pair(3)
    space = SearchSpace(thresholds=DEFAULT_THRESHOLDS[::5], a1_values=(1, 2), metric="mse")
    (res,) = grid_search([(img, gt, name)], space, keep_all=True)
    assert res.best.mse == min(r.mse for r in res.evaluations)


def test_grid_search_tie_breaks_low_t_then_small_window():
    img = np.full((8, 8), 0.5)
    gt = np.zeros((8, 8), dtype=np.uint8)
    space = SearchSpace(thresholds=(0.2, 0.1, 0.3), a1_values=(1, 2), metric="accuracy")
    (res,) = grid_search([(img, gt)], space, method="bradley")
    # every t > 0 gives an all-zero mask, identical scores
    assert res.best.params["t"] == 0.1 and res.best.params["n_a"] == 4


def test_grid_search_error_entry_and_empty():
    space = SearchSpace(thresholds=(0.5,), a1_values=(9,))
    (res,) = grid_search([(np.ones((4, 4)), np.ones((4, 4), dtype=np.uint8), "tiny")], space)
    assert res.best is None and "no valid configuration" in res.error
    with pytest.raises(ValueError):
        grid_search([], space)


def test_grid_best_dominates_all():
    img, gt, name = toy_pair(4)
    space = SearchSpace(thresholds=DEFAULT_THRESHOLDS[::3], a1_values=(1, 2, 3), methods=("a4",))
    (res,) = grid_search([(img, gt, name)], space, keep_all=True)
    assert all(res.best.f1 >= r.f1 for r in res.evaluations)


def test_vote_examples():
    assert vote([(0.95, 0.91), (0.80, 0.99)], 0.90) == VoteTally(0.90, 1, 1)
    assert vote([(0.5, 0.5)] * 4, 0.0) == VoteTally(0.0, 0, 0)
    assert vote([(0.2, 0.1), (0.1, 0.3), (0.4, 0.2)], 0.0) == VoteTally(0.0, 2, 1)
    with pytest.raises(ValueError):
        vote([(0.1, 0.2, 0.3)], 0.5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), max_size=30), st.randoms())
def test_vote_order_independent(pairs, random):
    shuffled = list(pairs)
    random.shuffle(shuffled)
    for theta in (0.0, 0.55, 0.9):
        t1, t2 = vote(pairs, theta), vote(shuffled, theta)
        assert t1 == t2
        assert t1.g_flat + t1.g_bradley <= len(pairs)


def test_compare_table_shape():
    pairs = [toy_pair(i) for i in range(3)]
    space = SearchSpace(thresholds=(0.1, 0.5, 0.9), a1_values=(1, 2))
    table = compare(pairs, space, kinds=("a2", "a3"))
    assert list(table) == ["a2", "a3"]
    assert [v.theta for v in table["a2"]] == [0.9, 0.55, 0.0]
    assert all(v.g_flat + v.g_bradley <= 3 * 3 * 2 for v in table["a2"])
    text = format_vote_table(table)
    assert "F_A2" in text and "0.55" in text


def test_run_method_all(rng):
    img = rng.random((10, 10))
    for m in ("a1", "a2", "a3", "a4", "bradley", "niblack", "sauvola", "otsu"):
        assert run_method(img, m, BinarizeParams()).shape == img.shape


def test_bench_fps(rng):
    images = [rng.random((50, 50)) for _ in range(3)]
    rep = bench_fps(images, repetitions=2)
    assert rep.fps > 0 and math.isfinite(rep.fps)
    assert rep.reference_fps == 1100.0
    assert "1100" in rep.describe()
    assert bench_fps(images, repetitions=1, n_jobs=2).n_jobs == 2
    with pytest.raises(ValueError):
        bench_fps([])


def _reports():
    img, gt, name = toy_pair()
    space = SearchSpace(thresholds=(0.1, 0.4), a1_values=(1, 2), methods=("a2", "otsu"))
    out = []
    for res in grid_search([(img, gt, name)], space, keep_all=True):
        out.extend(res.evaluations)
    return out


def test_report_empty_is_header_only(tmp_path):
    csv_path, _ = report([], tmp_path)
    assert csv_path.read_text() == ",".join(CSV_FIELDS) + "\n"


def test_report_deterministic_and_roundtrip(tmp_path):
    rs = _reports()
    a = report(rs, tmp_path / "a")
    b = report(list(reversed(rs)), tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()
    back = read_csv(a[0])
    key = lambda r: (r.method, str(r.params))
    for got, want in zip(sorted(back, key=key), sorted(rs, key=key)):
        assert got.metrics() == want.metrics()
        assert got.params == want.params
        assert (got.method, got.image) == (want.method, want.image)
    doc = json.loads(a[1].read_text())
    assert doc["std"] == "population" and set(doc["methods"]) == {"a2", "otsu"}


def test_summary_population_std():
    rs = [EvalReport(ssim=v, mse=0, accuracy=0, precision=0, recall=0, f1=v, mcc=0, method="m")
          for v in (0.8, 0.9)]
    s = summarize(rs)["m"]["f1"]
    assert s["mean"] == pytest.approx(0.85, abs=1e-15)
    assert s["std"] == pytest.approx(0.05, abs=1e-15)


def test_write_csv_unwritable(tmp_path):
    with pytest.raises(OSError):
        write_csv(_reports(), tmp_path / "missing" / "x.csv")
