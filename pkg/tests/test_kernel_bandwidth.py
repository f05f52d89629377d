import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppl_lab.bandwidth import (KernelFolds, bandwidth_bounds, cvl_statistic, log_scale_search,
                               poisson_lik_cv_terms, ppl_innovations, select_bandwidth_cvl,
                               select_bandwidth_poisson_lik_cv, select_bandwidth_ppl)
from ppl_lab.cv import CvScheme, FoldMasks, mccv_masks
from ppl_lab.geometry import UNIT_SQUARE, PointPattern, QuadratureGrid, Window
from ppl_lab.innovations import Inverse, InverseSqrt
from ppl_lab.kernel import (fold_surfaces, gaussian_kernel, kernel_intensity, kernel_surface,
                            local_edge_weights)
from ppl_lab.learning import loss_from_arrays
from ppl_lab.simulate import simulate_poisson

from conftest import random_pattern

G64 = QuadratureGrid(UNIT_SQUARE, 64)


def test_kernel_peak():
    assert gaussian_kernel(np.array(0.0), 0.1) == pytest.approx(1 / (2 * math.pi * 0.01))


def test_empty_pattern_estimate_is_zero():
    assert np.all(kernel_intensity(PointPattern.empty(), 0.1, [[0.5, 0.5]]) == 0)
    assert np.all(kernel_surface(PointPattern.empty(), 0.1, G64) == 0)


def test_invalid_bandwidth_and_edge():
    x = PointPattern([[0.5, 0.5]])
    with pytest.raises(ValueError):
        kernel_intensity(x, 0.0, [[0.5, 0.5]])
    with pytest.raises(ValueError):
        kernel_surface(x, 0.1, G64, "reflect")


@given(st.integers(1, 40), st.floats(0.02, 0.15), st.integers(0, 2 ** 31))
@settings(max_examples=15, deadline=None)
def test_edge_corrected_mass_preserved(n, theta, seed):
    x = random_pattern(np.random.default_rng(seed), n)
    g = QuadratureGrid(UNIT_SQUARE, 256)
    mass = kernel_surface(x, theta, g, "local").sum() * g.cell_area
    assert mass == pytest.approx(n, rel=0.005)


def test_local_weights_interior_and_corner():
    w = local_edge_weights(np.array([[0.5, 0.5], [0.0, 0.0]]), 0.01, UNIT_SQUARE)
    assert w[0] == pytest.approx(1.0) and w[1] == pytest.approx(0.25)


def test_surface_matches_pointwise(rng):
    x = random_pattern(rng, 25)
    for edge in ("none", "local"):
        s = kernel_surface(x, 0.07, G64, edge)
        assert np.allclose(s, kernel_intensity(x, 0.07, G64.cell_centers, edge))


def test_fold_surfaces_match_subsets(rng):
    x = random_pattern(rng, 30)
    masks = mccv_masks(x, 0.4, 3, seed=1)
    fs = fold_surfaces(x, masks.training, 0.09, G64)
    for i in range(3):
        assert np.allclose(fs[i], kernel_surface(x.subset(masks.training[i]), 0.09, G64, "none"))


def test_cvl_defining_property():
    x = simulate_poisson(250.0, seed=3)
    fit = select_bandwidth_cvl(x)
    lo, hi = bandwidth_bounds(UNIT_SQUARE)
    assert lo < fit.theta < hi
    assert abs(cvl_statistic(x, fit.theta) - 1.0) < 0.02


def test_single_point_selectors_run():
    x = PointPattern([[0.4, 0.6]])
    assert select_bandwidth_cvl(x).theta > 0
    with pytest.raises(ValueError, match="no admissible folds"):
        select_bandwidth_ppl(x, CvScheme.mccv(0.5, 10), seed=0)


def test_bandwidth_bounds_scale_with_window():
    assert bandwidth_bounds(Window(0, 2, 0, 4)) == pytest.approx((0.02, 1.4))


def test_log_scale_search_finds_interior_minimum():
    theta, value, land = log_scale_search(lambda t: (math.log(t / 0.037)) ** 2, (0.01, 0.7), 1e-6)
    assert theta == pytest.approx(0.037, rel=1e-4)
    assert np.all(np.diff(land["theta"]) >= 0)


def test_identical_folds_make_l2_equal_l3(rng):
    x = random_pattern(rng, 40)
    one = mccv_masks(x, 0.5, 1, seed=2)
    masks = FoldMasks(x, np.repeat(one.validation, 2, 0), np.repeat(one.training, 2, 0), 0.5)
    folds = KernelFolds(x, masks)
    v = ppl_innovations(folds, 0.08, Inverse, G64)
    assert loss_from_arrays(v, folds.indicators, "L2") == pytest.approx(
        loss_from_arrays(v, folds.indicators, "L3"))


def test_ppl_inverse_integral_is_window_area(rng):
    x = random_pattern(rng, 50)
    folds = KernelFolds(x, mccv_masks(x, 0.5, 4, seed=3))
    v = ppl_innovations(folds, 0.1, Inverse, G64)
    z = folds.w * folds.training_sums(0.1)
    assert np.allclose(v, np.where(folds.V, 1 / z, 0).sum(1) - 1.0)


def test_ppl_selection_runs_and_is_deterministic():
    x = simulate_poisson(250.0, seed=8)
    a = select_bandwidth_ppl(x, CvScheme.mccv(0.5, 20), InverseSqrt, "L2", seed=1, grid=G64)
    b = select_bandwidth_ppl(x, CvScheme.mccv(0.5, 20), InverseSqrt, "L2", seed=1, grid=G64)
    lo, hi = bandwidth_bounds(UNIT_SQUARE)
    assert a.theta == b.theta and lo <= a.theta <= hi
    assert a.to_dict()["f"] == "inverse_sqrt"


def test_poisson_lik_cv_guards_underflow():
    # widely separated points: the naive log of the kernel sum underflows at small bandwidths
    x = PointPattern([[0.05, 0.05], [0.95, 0.95], [0.05, 0.95], [0.95, 0.05]])
    masks = mccv_masks(x, 0.5, 30, seed=0)
    folds = KernelFolds(x, masks)
    ll, ok = poisson_lik_cv_terms(folds, 0.005)
    assert np.all(np.isfinite(ll)) and ok.any()
    fit = select_bandwidth_poisson_lik_cv(x, CvScheme.mccv(0.5, 30), seed=0)
    assert math.isfinite(fit.value) and fit.theta > 0
