"""Hard-core model fitting: CV innovations over (beta, R) and the pseudolikelihood baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cv import CvScheme, FoldMasks, scheme_masks
from .geometry import (PointPattern, QuadratureGrid, coverage_distances, default_grid,
                       min_pairwise_distance, nearest_distance, uncovered_area,
                       uncovered_area_from)
from .innovations import Inverse, Power
from .learning import SearchSpec, loss_from_arrays, minimize
from .simulate import Seed


@dataclass
class HardCoreFit:
    beta: float
    R: float
    sup_R: float
    loss_value: float
    beta_pl: float
    R_pl: float
    counted_folds: int
    landscape: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "R": self.R, "sup_R": self.sup_R, "loss": self.loss_value,
                "beta_pl": self.beta_pl, "R_pl": self.R_pl, "counted_folds": self.counted_folds}


def fit_hardcore_pseudolikelihood(x: PointPattern, grid: Optional[QuadratureGrid] = None):
    """``R = Rbar * n / (n + 1)``, ``beta = n / |W minus union of R-balls|``."""
    grid = grid or default_grid(x.window)
    n = len(x)
    R = min_pairwise_distance(x) * n / (n + 1)
    free = uncovered_area(x, R, x.window, grid)
    if free <= 0:
        raise ValueError("window fully covered; pseudolikelihood intensity undefined")
    return n / free, R


class HardCoreFolds:
    """Per-fold quantities needed to evaluate the reduced innovations at any (beta, R)."""

    def __init__(self, x: PointPattern, masks: FoldMasks, grid: QuadratureGrid):
        n = len(x)
        nT = masks.training.sum(1)
        self.counted = np.flatnonzero((nT >= 1) & (nT <= n - 1))
        if self.counted.size == 0:
            raise ValueError("no admissible folds")
        self.p = masks.p
        self.w = self.p / (1 - self.p)
        self.n_val = masks.validation[self.counted].sum(1).astype(float)
        self.cell_area = grid.cell_area
        self.cover = []
        cross = []
        for i in self.counted:
            T = x.subset(masks.training[i])
            V = x.xy[masks.validation[i]]
            self.cover.append(coverage_distances(T, grid))
            cross.append(nearest_distance(V, T.xy).min() if len(V) else math.inf)
        self.cross = np.asarray(cross)
        self.sup_R = float(self.cross.min())

    def free_area(self, R: np.ndarray) -> np.ndarray:
        """``(len(R), folds)`` uncovered areas."""
        R = np.atleast_1d(np.asarray(R, dtype=float))
        return np.stack([uncovered_area_from(c, R, self.cell_area) for c in self.cover], axis=1)

    def innovations(self, beta, A: np.ndarray, R, f: Power = Inverse) -> np.ndarray:
        """Fold innovations for a broadcastable ``beta`` against free areas ``A``."""
        z = self.w * np.asarray(beta, dtype=float)
        vals = self.n_val * z ** f.exponent - z ** (f.exponent + 1) * A
        infeasible = np.asarray(R, dtype=float)[..., None] >= self.cross
        return np.where(infeasible, np.inf, vals)

    def fold_roots(self, A: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.n_val / (self.w * A)


def r_candidates(sup_R: float, n: int = 64) -> np.ndarray:
    """``sup * j / n``; the last is nudged below ``sup`` because balls are closed."""
    R = sup_R * np.arange(1, n + 1) / n
    R[-1] = np.nextafter(sup_R, 0.0)
    return R


def fit_hardcore(x: PointPattern, scheme: CvScheme, f: Power = Inverse, loss: str = "L2",
                 seed: Seed = 0, grid: Optional[QuadratureGrid] = None, n_R: int = 64,
                 beta_tol: float = 1e-7, masks: Optional[FoldMasks] = None,
                 folds: Optional[HardCoreFolds] = None) -> HardCoreFit:
    """Joint (beta, R) minimiser of the fold loss with R restricted to the feasible range.

    ``folds`` may be passed to reuse coverage computations across losses.
    """
    if len(x) < 2:
        raise ValueError("insufficient points")
    grid = grid or default_grid(x.window)
    if folds is None:
        masks = masks if masks is not None else scheme_masks(x, scheme, seed)
        folds = HardCoreFolds(x, masks, grid)
    if not math.isfinite(folds.sup_R):
        raise ValueError("no feasible parameter")
    Rs = r_candidates(folds.sup_R, n_R)
    A_all = folds.free_area(Rs)
    ind = np.ones(folds.counted.size, bool)
    betas = np.full(n_R, np.nan)
    losses = np.full(n_R, np.inf)
    for j, R in enumerate(Rs):
        A = A_all[j]
        if np.any(A <= 0):
            continue
        roots = folds.fold_roots(A)
        lo, hi = float(roots.min()), float(roots.max())
        if hi <= 0:
            continue
        lo = max(lo, hi * 1e-9)
        fn = (lambda b, A=A, R=R: loss_from_arrays(folds.innovations(b, A, R, f), ind, loss))
        if hi - lo <= beta_tol * hi:
            b, v = hi, fn(hi)
        else:
            res = minimize(fn, SearchSpec(((lo, hi),), "golden", beta_tol, log_scale=True))
            b, v = res.scalar, res.value
        betas[j], losses[j] = b, v
    if not np.any(np.isfinite(losses)):
        raise ValueError("no feasible parameter")
    j = int(np.argmin(losses))
    beta_pl, R_pl = fit_hardcore_pseudolikelihood(x, grid)
    return HardCoreFit(float(betas[j]), float(Rs[j]), folds.sup_R, float(losses[j]),
                       beta_pl, R_pl, int(folds.counted.size),
                       {"R": Rs, "beta": betas, "loss": losses})
