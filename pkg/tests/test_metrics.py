import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppl_lab.geometry import UNIT_SQUARE, QuadratureGrid
from ppl_lab.metrics import scalar_metrics, surface_metrics

vals = st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=2, max_size=50)


def test_scalar_example():
    m = scalar_metrics([3, 5], 4)
    assert (m.bias, m.variance, m.mse) == (0, 1, 1)


@given(st.floats(-100, 100), st.floats(0.01, 100))
def test_symmetric_pair_bias_zero(truth, c):
    m = scalar_metrics([truth - c, truth + c], truth)
    assert m.bias == pytest.approx(0, abs=1e-9 * (1 + abs(truth)))
    assert m.mse == pytest.approx(c * c, rel=1e-9)


@given(vals, st.floats(-1e4, 1e4))
def test_mse_decomposition(e, truth):
    m = scalar_metrics(e, truth)
    assert m.mse == pytest.approx(m.bias ** 2 + m.variance, rel=1e-9, abs=1e-6)
    assert m.abs_bias == abs(m.bias) and m.n == len(e)


def test_scalar_needs_two():
    with pytest.raises(ValueError):
        scalar_metrics([1.0], 0)


def test_surface_metrics(rng):
    g = QuadratureGrid(UNIT_SQUARE, 8)
    truth = np.full(64, 10.0)
    S = truth + rng.normal(size=(30, 64))
    m = surface_metrics(S, truth, g)
    assert m.mise == pytest.approx(m.isb + m.iv)
    assert m.iab >= 0
    exact = surface_metrics(np.tile(truth, (3, 1)), truth, g)
    assert exact.iab == exact.isb == exact.iv == exact.mise == 0
    shifted = surface_metrics(np.tile(truth + 2, (3, 1)), truth, g)
    assert shifted.iab == pytest.approx(2) and shifted.isb == pytest.approx(4)
    with pytest.raises(ValueError):
        surface_metrics(S[:, :10], truth, g)
