import numpy as np
import pytest
from hypothesis import given, settings

from flatbin.aggregators import AggregatorKind
from flatbin.image import Rect
from flatbin.integral import (
    fuzzy_integral_image,
    fuzzy_integral_image_reference,
    rect_mean,
    rect_sum,
    sat,
    sat_bruteforce,
)

from conftest import gray_images

ONES = np.ones((2, 2))
KINDS = list(AggregatorKind)


def test_sat_small_cases():
    np.testing.assert_array_equal(sat(ONES), [[1, 2], [2, 4]])
    np.testing.assert_array_equal(sat(np.array([[0.3]])), [[0.3]])
    np.testing.assert_array_equal(sat_bruteforce(ONES), [[1, 2], [2, 4]])
    a, b, c = 0.1, 0.2, 0.3
    np.testing.assert_allclose(sat_bruteforce(np.array([[a, b, c]])), [[a, a + b, a + b + c]], atol=1e-15)


def test_sat_random_8x8(rng):
    img = rng.random((8, 8))
    np.testing.assert_allclose(sat(img), sat_bruteforce(img), rtol=0, atol=1e-9)


def test_cf12_hand_trace():
    S, F = fuzzy_integral_image(ONES, "a2")
    np.testing.assert_array_equal(S, [[1, 2], [2, 4]])
    assert F[1, 1] == 4.5
    assert F[0, 1] == 2.0
    assert F[1, 0] == 2.0
    assert F[0, 0] == 1.0


def test_sugeno_hand_trace():
    _, F = fuzzy_integral_image(ONES, "a1")
    assert F[1, 1] == 1.0


def test_choquet_interior_is_corner_mean(rng):
    img = rng.random((9, 7))
    S, F = fuzzy_integral_image(img, "a4")
    corners = (S[1:, 1:] + S[1:, :-1] + S[:-1, 1:] + S[:-1, :-1]) / 4
    np.testing.assert_allclose(F[1:, 1:], corners, rtol=0, atol=1e-12)


def test_visits_each_pixel_once(rng):
    img = rng.random((6, 11))
    visits = np.zeros(img.shape, dtype=np.int64)
    fuzzy_integral_image(img, "a3", visits=visits)
    np.testing.assert_array_equal(visits, 1)


def test_visits_shape_checked():
    with pytest.raises(ValueError):
        fuzzy_integral_image(ONES, "a2", visits=np.zeros((3, 3), dtype=np.int64))


def test_ordering_check_passes_on_valid_input(rng):
    fuzzy_integral_image(rng.random((16, 16)), "a2", check=True)


def test_sugeno_saturates():
    img = np.full((6, 6), 0.9)
    _, F = fuzzy_integral_image(img, "a1")
    # every interior cell past (1,1) has all four corners >= 1
    assert np.all(F[2:, 2:] == 1.0)


@settings(max_examples=60, deadline=None)
@given(gray_images(16))
def test_fuzzy_table_matches_reference(img):
    for kind in KINDS:
        S, F = fuzzy_integral_image(img, kind)
        np.testing.assert_array_equal(S, sat(img))
        np.testing.assert_allclose(F, fuzzy_integral_image_reference(img, kind), rtol=0, atol=1e-12)
        assert F[0, 0] == img[0, 0]
        assert F.min() >= 0.0
        if kind is AggregatorKind.A1_SUGENO:
            assert np.all(F <= np.maximum(S, 1.0) + 1e-15)


@settings(max_examples=60, deadline=None)
@given(gray_images(16))
def test_sat_monotone_and_total(img):
    S = sat(img)
    assert np.all(np.diff(S, axis=0) >= -1e-12)
    assert np.all(np.diff(S, axis=1) >= -1e-12)
    assert abs(S[-1, -1] - img.sum()) <= 1e-9
    assert S[0, 0] == img[0, 0]


def test_rect_queries():
    S = sat(ONES)
    assert rect_sum(S, Rect(0, 0, 2, 2)) == 4
    assert rect_sum(S, Rect(1, 1, 2, 2)) == 1
    assert rect_sum(S, Rect(0, 0, 1, 2)) == S[0, 1]
    assert rect_mean(S, Rect(0, 0, 2, 2)) == 1
    with pytest.raises(ValueError):
        rect_sum(S, Rect(1, 1, 1, 2))


def test_rect_mean_single_pixel_and_constant(rng):
    img = rng.random((5, 6))
    S = sat(img)
    for r in range(5):
        for c in range(6):
            assert rect_mean(S, Rect(r, c, r + 1, c + 1)) == pytest.approx(img[r, c], abs=1e-12)
    const = sat(np.full((7, 7), 0.37))
    assert rect_mean(const, Rect(2, 1, 6, 5)) == pytest.approx(0.37, abs=1e-12)
