import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppl_lab.cv import CvSplit
from ppl_lab.geometry import UNIT_SQUARE, PointPattern, QuadratureGrid
from ppl_lab.innovations import Constant, ConstantIntensity, InnovationValue
from ppl_lab.learning import (FoldEstimates, SearchSpec, loss, loss_from_arrays, loss_matrix,
                              median_midpoint, minimize, per_fold_estimates)

G16 = QuadratureGrid(UNIT_SQUARE, 16)
finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_loss_examples():
    v, ind = [3.0, -4.0], [1, 1]
    assert loss_from_arrays(v, ind, "L1") == 3.5
    assert loss_from_arrays(v, ind, "L2") == 12.5
    assert loss_from_arrays(v, ind, "L3") == 0.25
    with pytest.raises(ValueError):
        loss_from_arrays(v, ind, "L4")
    with pytest.raises(ValueError):
        loss_from_arrays([], [], "L2")


@given(finite)
def test_single_fold_identities(a):
    assert loss_from_arrays([a], [1], "L1") ** 2 == pytest.approx(loss_from_arrays([a], [1], "L2"))
    assert loss_from_arrays([a], [1], "L2") == pytest.approx(loss_from_arrays([a], [1], "L3"))


@given(st.lists(finite, min_size=1, max_size=30))
def test_loss_inequality_chain(vals):
    ind = np.ones(len(vals))
    l1, l2, l3 = (loss_from_arrays(vals, ind, k) for k in ("L1", "L2", "L3"))
    slack = 1e-9 * (1 + l2)
    assert l3 <= l2 + slack and l1 ** 2 <= l2 + slack
    assert l1 ** 2 <= len(vals) * l2 + slack


@given(st.lists(finite, min_size=2, max_size=20), st.randoms())
def test_loss_permutation_invariant(vals, rnd):
    perm = list(vals)
    rnd.shuffle(perm)
    for k in ("L1", "L2", "L3"):
        assert loss_from_arrays(vals, np.ones(len(vals)), k) == pytest.approx(
            loss_from_arrays(perm, np.ones(len(perm)), k), rel=1e-12, abs=1e-12)


def test_uncounted_folds_contribute_zero():
    assert loss_from_arrays([3.0, math.inf, 5.0], [1, 0, 1], "L2") == pytest.approx(34 / 3)
    assert loss_from_arrays([3.0, math.inf], [1, 1], "L2") == math.inf


def test_loss_matrix_rows_match_scalar(rng):
    v = rng.normal(size=(5, 7))
    v[2, 3] = math.inf
    ind = rng.random(7) < 0.7
    for k in ("L1", "L2", "L3"):
        row = loss_matrix(v, ind, k)
        assert np.allclose(row, [loss_from_arrays(r, ind, k) for r in v])


def test_loss_from_innovation_values():
    vals = [InnovationValue(3.0, 0, 1), InnovationValue(-4.0, 1, 1)]
    assert loss(vals, "L2") == 12.5
    vals.append(InnovationValue(math.inf, 2, 1, True, "infeasible(R=0.1)"))
    assert loss(vals, "L1") == math.inf


@pytest.mark.parametrize("method", ["grid", "golden"])
def test_minimize_quadratic(method):
    res = minimize(lambda t: (t - 0.37) ** 2, SearchSpec(((0, 1),), method, tol=1e-8))
    assert res.scalar == pytest.approx(0.37, abs=1e-6)


def test_minimize_two_dimensional():
    res = minimize(lambda t: (t[0] - 2) ** 2 + 3 * (t[1] + 1) ** 2,
                   SearchSpec(((0, 5), (-3, 3)), tol=1e-7))
    assert np.allclose(res.theta, [2, -1], atol=1e-5)


def test_minimize_log_scale():
    res = minimize(lambda t: (math.log(t) - math.log(0.05)) ** 2,
                   SearchSpec(((1e-3, 1.0),), "golden", tol=1e-7, log_scale=True))
    assert res.scalar == pytest.approx(0.05, rel=1e-5)


def test_minimize_skips_infeasible_plateau():
    f = lambda t: math.inf if t > 0.6 else (t - 0.3) ** 2
    for method in ("grid", "golden"):
        res = minimize(f, SearchSpec(((0, 1),), method, tol=1e-8))
        assert res.scalar == pytest.approx(0.3, abs=1e-5)
    with pytest.raises(ValueError, match="no feasible"):
        minimize(lambda t: math.inf, SearchSpec(((0, 1),)))


def test_minimize_deterministic():
    f = lambda t: abs(math.sin(7 * t)) + 0.1 * t
    a = minimize(f, SearchSpec(((0, 2),)))
    b = minimize(f, SearchSpec(((0, 2),)))
    assert a.scalar == b.scalar and a.trace == b.trace


def test_plateau_center_gives_median_midpoint():
    roots = np.array([1.0, 2.0, 5.0, 9.0])
    res = minimize(lambda t: np.abs(t - roots).mean(), SearchSpec(((0, 10),), tol=1e-9))
    assert res.scalar == pytest.approx(median_midpoint(roots), abs=1e-6)


def test_search_spec_validation():
    for bad in (dict(bounds=((1, 0),)), dict(bounds=((0, 1),), tol=0),
                dict(bounds=((0, 1),), method="nm"), dict(bounds=((0, 1), (0, 1)), method="golden"),
                dict(bounds=((0, 1),), log_scale=True)):
        with pytest.raises(ValueError):
            SearchSpec(**bad)


def test_median_midpoint():
    assert median_midpoint([3, 1, 2]) == 2
    assert median_midpoint([4, 1, 2, 3]) == 2.5
    with pytest.raises(ValueError):
        median_midpoint([])


def test_fold_estimates_combiners():
    fe = FoldEstimates(np.array([90.0, 110.0]), np.array([0, 1]))
    assert fe.combine("mean") == 100 and fe.combine("median") == 100
    with pytest.raises(ValueError):
        fe.combine("mode")
    with pytest.raises(ValueError):
        FoldEstimates(np.empty(0), np.empty(0, int))


def test_per_fold_estimates_example(rng):
    # 45 training points with p = 0.5: each fold root is 45 / 0.5 = 90
    T = PointPattern(rng.random((45, 2)))
    V = PointPattern(rng.random((10, 2)))
    empty = CvSplit(PointPattern.empty(), V, 0.5, 1)
    fe = per_fold_estimates([CvSplit(T, V, 0.5, 0), empty], ConstantIntensity, Constant(1),
                            "product_density", SearchSpec(((0, 500),), tol=1e-9), G16)
    assert list(fe.folds) == [0]
    assert fe.thetas[0] == pytest.approx(90, abs=1e-5)
