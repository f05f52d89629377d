import math

import numpy as np
import pytest

from ppl_lab.cv import CvScheme, FoldMasks, mccv_masks
from ppl_lab.geometry import UNIT_SQUARE, PointPattern, QuadratureGrid, uncovered_area
from ppl_lab.hardcore import HardCoreFolds, fit_hardcore, fit_hardcore_pseudolikelihood, r_candidates
from ppl_lab.innovations import Inverse, InverseSqrt, Power
from ppl_lab.simulate import HardCoreSpec, simulate_hardcore

G128 = QuadratureGrid(UNIT_SQUARE, 128)


@pytest.fixture(scope="module")
def pattern():
    return simulate_hardcore(HardCoreSpec(100, 0.05, 30000), seed=21)


def test_pseudolikelihood_two_points():
    x = PointPattern([[0.3, 0.5], [0.7, 0.5]])
    beta, R = fit_hardcore_pseudolikelihood(x, G128)
    assert R == pytest.approx(0.4 * 2 / 3, rel=1e-12)
    assert beta == pytest.approx(2 / uncovered_area(x, R, UNIT_SQUARE, G128))


def test_pseudolikelihood_beta_exceeds_naive_intensity(pattern):
    beta, R = fit_hardcore_pseudolikelihood(pattern, G128)
    assert beta >= len(pattern) and R < 0.05 + 1e-12


def test_r_candidates():
    R = r_candidates(0.04, 64)
    assert len(R) == 64 and np.all(np.diff(R) > 0)
    assert R[-1] < 0.04 and R[0] == pytest.approx(0.04 / 64)


@pytest.mark.parametrize("f", [Inverse, InverseSqrt, Power(-0.25)])
def test_fold_root_zeroes_innovation(pattern, f):
    folds = HardCoreFolds(pattern, mccv_masks(pattern, 0.2, 15, seed=1), G128)
    R = 0.5 * folds.sup_R
    A = folds.free_area([R])[0]
    roots = folds.fold_roots(A)
    vals = folds.innovations(roots, A, R, f)
    assert np.allclose(vals, 0, atol=1e-9)


def test_innovation_infeasible_beyond_sup(pattern):
    folds = HardCoreFolds(pattern, mccv_masks(pattern, 0.2, 15, seed=1), G128)
    A = folds.free_area([folds.sup_R])[0]
    assert np.isinf(folds.innovations(50.0, A, folds.sup_R)).any()


def test_fit_hardcore_properties(pattern):
    masks = mccv_masks(pattern, 0.1, 100, seed=4)
    folds = HardCoreFolds(pattern, masks, G128)
    fit = fit_hardcore(pattern, CvScheme.mccv(0.1, 100), Inverse, "L2", grid=G128, folds=folds)
    assert 0 < fit.R < fit.sup_R
    land = fit.landscape
    assert fit.loss_value == pytest.approx(np.nanmin(land["loss"]))
    A = folds.free_area([fit.R])[0]
    roots = folds.fold_roots(A)
    assert roots.min() * (1 - 1e-6) <= fit.beta <= roots.max() * (1 + 1e-6)
    assert fit.counted_folds == folds.counted.size
    d = fit.to_dict()
    assert set(d) >= {"beta", "R", "sup_R", "beta_pl", "R_pl"}


@pytest.mark.parametrize("loss", ["L1", "L3"])
def test_fit_hardcore_other_losses(pattern, loss):
    fit = fit_hardcore(pattern, CvScheme.multinomial(4), InverseSqrt, loss, seed=2, grid=G128)
    assert math.isfinite(fit.loss_value) and fit.beta > 0 and 0 < fit.R < fit.sup_R


def test_fit_hardcore_insufficient_points():
    with pytest.raises(ValueError, match="insufficient points"):
        fit_hardcore(PointPattern([[0.5, 0.5]]), CvScheme.mccv(0.5, 4), grid=G128)


def test_folds_require_admissible_split():
    x = PointPattern([[0.2, 0.2], [0.8, 0.8]])
    val = np.array([[True, True], [False, False]])
    masks = FoldMasks(x, val, ~val, 0.5)
    with pytest.raises(ValueError, match="no admissible folds"):
        HardCoreFolds(x, masks, G128)
