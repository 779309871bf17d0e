import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp


def gray_images(max_side=16, min_side=1):
    shapes = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side))
    return shapes.flatmap(
        lambda s: hnp.arrays(np.float64, s, elements=st.floats(0.0, 1.0, allow_nan=False, width=64))
    )


def binary_images(shape):
    return hnp.arrays(np.uint8, shape, elements=st.integers(0, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_tone(rows=8, cols=8, dark=0.2, bright=0.8):
    img = np.full((rows, cols), bright)
    img[:, : cols // 2] = dark
    return img


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
