import json

import numpy as np
import pytest

from flatbin.datasets import (
    TOY_TABLE,
    PerturbationSpec,
    SplitMix64,
    ToyImageSpec,
    load_pairs,
    measure_perturbation,
    otsu_select,
    toy_generate,
    toy_specs,
    toy_trace,
    write_toy_dataset,
)
from flatbin.image import save_binary, save_gray
from flatbin.metrics import confusion, scalar_metrics
from flatbin.binarize import otsu


def test_splitmix64_reference_vector():
    # published first outputs for seed 0
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4


def test_splitmix64_helpers():
    rng = SplitMix64(7)
    assert 0.0 <= rng.random() < 1.0
    assert sorted(rng.permutation(10)) == list(range(10))
    assert all(0 <= rng.randbelow(3) < 3 for _ in range(50))


def test_measure_perturbation():
    before = np.array([[0.25, 0.75], [0.25, 0.75]])
    after = np.array([[0.30, 0.75], [0.25, 0.55]])
    cov, var = measure_perturbation(before, after)
    assert cov == 0.5
    assert var == pytest.approx(0.15, abs=1e-12)
    assert measure_perturbation(before, before) == (0.0, 0.0)


@pytest.mark.parametrize("spec", toy_specs(), ids=lambda s: s.label)
def test_toy_conformance(spec):
    assert spec.rows in (8, 9)
    trace = toy_trace(spec)
    assert len(trace) == len(TOY_TABLE[spec.label])
    for (kind, cov, var), (tkind, tcov, tvar) in zip(trace, TOY_TABLE[spec.label]):
        assert kind == tkind
        assert abs(cov - tcov) <= 0.02
        assert abs(var - tvar) <= 0.02 + 1e-9


def test_image_a_gamma0_band():
    a = toy_specs()[0]
    kind, cov, var = toy_trace(a)[0]
    assert kind == "gamma0" and 0.85 <= cov <= 0.89 and 0.18 <= var <= 0.22
    gray, gt = toy_generate(a)
    assert gray.shape == gt.shape == (9, 9)


def test_deterministic_and_two_decimals():
    for spec in toy_specs():
        g1, t1 = toy_generate(spec)
        g2, t2 = toy_generate(spec)
        assert g1.tobytes() == g2.tobytes() and t1.tobytes() == t2.tobytes()
        np.testing.assert_array_equal(np.rint(g1 * 100) / 100, g1)
        assert g1.min() >= 0 and g1.max() <= 1


def test_different_master_seed_changes_pixels():
    a = toy_generate(toy_specs(1)[0])[0]
    b = toy_generate(toy_specs(2)[0])[0]
    assert not np.array_equal(a, b)


def test_zero_perturbation_identity():
    spec = ToyImageSpec("z", 8, 8, "disk", fg_level=1.0, bg_level=0.0)
    gray, gt = toy_generate(spec)
    np.testing.assert_array_equal(gray, gt.astype(float))


def test_gt_is_clean_base_shape():
    for spec in toy_specs():
        clean = ToyImageSpec(spec.label, spec.rows, spec.cols, spec.shape, seed=spec.seed)
        np.testing.assert_array_equal(toy_generate(spec)[1], toy_generate(clean)[1])


def test_gt_noise_flag_flips_pixels():
    spec = toy_specs()[1]
    noisy = ToyImageSpec(**{**spec.__dict__, "gt_noise": 0.1})
    diff = toy_generate(noisy)[1] != toy_generate(spec)[1]
    assert diff.sum() == round(0.1 * 64)


def test_infeasible_coverage():
    spec = ToyImageSpec("x", 8, 8, "block", perturbations=(("gamma4", 0.9, 0.1),))
    with pytest.raises(ValueError, match="infeasible"):
        toy_generate(spec)


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec("gamma9", 0.1, 0.1)
    with pytest.raises(ValueError):
        PerturbationSpec("gamma0", 1.2, 0.1)
    with pytest.raises(ValueError):
        ToyImageSpec("x", 10, 8, "disk")


def test_spec_json_roundtrip():
    spec = toy_specs()[5]
    assert ToyImageSpec.from_dict(json.loads(spec.to_json())) == spec


def test_write_and_load_toy_dataset(tmp_path):
    specs = toy_specs()
    names = write_toy_dataset(specs, tmp_path)
    assert names == [s.name for s in specs]
    pairs = load_pairs(tmp_path)
    assert [p[2] for p in pairs] == sorted(names)
    for (img, gt, name), spec in zip(pairs, specs):
        g, t = toy_generate(spec)
        np.testing.assert_array_equal(img, g)
        np.testing.assert_array_equal(gt, t)
        assert ToyImageSpec.from_dict(json.loads((tmp_path / f"{name}_spec.json").read_text())) == spec


def test_load_pairs_skips_and_thresholds(tmp_path, caplog):
    for i in range(3):
        save_gray(np.full((4, 4), 0.5), tmp_path / f"p{i}.pgm")
        save_binary(np.eye(4, dtype=np.uint8), tmp_path / f"p{i}_gt.pgm")
    save_gray(np.full((4, 4), 0.5), tmp_path / "orphan.pgm")
    save_gray(np.full((4, 4), 0.5), tmp_path / "bad.pgm")
    save_binary(np.eye(5, dtype=np.uint8), tmp_path / "bad_gt.pgm")
    save_gray(np.where(np.eye(4) > 0, 0.9, 0.1), tmp_path / "soft_gt.pgm")
    save_gray(np.full((4, 4), 0.5), tmp_path / "soft.pgm")
    with caplog.at_level("WARNING"):
        pairs = load_pairs(tmp_path)
    assert [p[2] for p in pairs] == ["p0", "p1", "p2", "soft"]
    np.testing.assert_array_equal(pairs[-1][1], np.eye(4))
    assert "orphan" in caplog.text and "bad" in caplog.text


def test_load_pairs_requires_directory(tmp_path):
    with pytest.raises(NotADirectoryError):
        load_pairs(tmp_path / "nope")


def _f1_fixture():
    # tp=13, fn=7, fp=7: f1 = 26 / 40
    gt = np.zeros((10, 10), dtype=np.uint8)
    gt.ravel()[:20] = 1
    img = np.full((10, 10), 0.9)
    img.ravel()[:13] = 0.3
    img.ravel()[20:27] = 0.3
    return img, gt


def test_otsu_select():
    img, gt = _f1_fixture()
    f1 = scalar_metrics(confusion(otsu(img), gt))[3]
    assert f1 == pytest.approx(0.65, abs=1e-12)
    pair = (img, gt, "x")
    assert otsu_select([pair], 0.7) == []
    assert otsu_select([pair], 0.6) == [pair]
    exact = (np.where(gt == 1, 0.2, 0.8), gt, "y")
    assert otsu_select([exact], 1.0) == [exact]
    assert otsu_select([(np.full((4, 4), 0.5), np.eye(4, dtype=np.uint8), "c")], 0.0) == []
