"""Bandwidth selection for the Gaussian kernel intensity estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp
from scipy.spatial.distance import cdist

from .cv import CvScheme, FoldMasks, scheme_masks
from .geometry import PointPattern, QuadratureGrid, Window, default_grid
from .innovations import Inverse, Power
from .kernel import fold_surfaces, gaussian_kernel, kernel_surface, local_edge_weights
from .learning import SearchSpec, loss_from_arrays, minimize
from .simulate import Seed

SELECTORS = ("ppl", "cvl", "poisson_lik_cv")


def bandwidth_bounds(w: Window, lo: float = 0.01, hi: float = 0.7) -> tuple:
    ell = w.shorter_side
    return lo * ell, hi * ell


@dataclass
class BandwidthFit:
    theta: float
    selector: str
    value: float
    loss: Optional[str] = None
    f: Optional[str] = None
    edge_mode: str = "local"
    landscape: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {"bandwidth": self.theta, "selector": self.selector, "objective": self.value,
                "loss": self.loss, "f": self.f, "edge_mode": self.edge_mode}

    def surface(self, x: PointPattern, grid: QuadratureGrid) -> np.ndarray:
        return kernel_surface(x, self.theta, grid, self.edge_mode)


def log_scale_search(objective: Callable[[float], float], bounds: tuple,
                     tol: float = 1e-3, n_coarse: int = 25):
    """Coarse log-grid scan, then golden section inside the best bracket.

    Returns ``(theta, value, landscape)``; the scan doubles as a record of the
    objective so multimodality is visible rather than assumed away.
    """
    lo, hi = bounds
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), n_coarse))
    vals = np.array([objective(t) for t in grid], dtype=float)
    vals[np.isnan(vals)] = np.inf
    if not np.any(np.isfinite(vals)):
        raise ValueError("no feasible parameter")
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_coarse - 1)]
    res = minimize(objective, SearchSpec(((a, b),), "golden", tol, log_scale=True,
                                         center_plateau=False))
    theta, value = res.scalar, res.value
    if vals[i] < value:
        theta, value = float(grid[i]), float(vals[i])
    landscape = {"theta": np.concatenate([grid, [t[0] for t, _ in res.trace]]),
                 "value": np.concatenate([vals, [v for _, v in res.trace]])}
    order = np.argsort(landscape["theta"], kind="stable")
    return theta, value, {k: v[order] for k, v in landscape.items()}


class KernelFolds:
    """Fold-level kernel sums at the data points, without edge correction."""

    def __init__(self, x: PointPattern, masks: FoldMasks):
        self.x = x
        self.d2 = cdist(x.xy, x.xy, "sqeuclidean")
        self.T = masks.training.astype(float)
        self.V = masks.validation
        self.masks = masks
        self.p = masks.p
        self.w = self.p / (1 - self.p)
        nT = masks.training.sum(1)
        self.indicators = (nT >= 1) & (nT <= len(x) - 1)

    def training_sums(self, theta: float) -> np.ndarray:
        """``(k, n)``: uncorrected estimate from fold i's training set at each data point."""
        K = gaussian_kernel(self.d2, theta)
        return self.T @ K

    def log_training_sums(self, theta: float) -> np.ndarray:
        rho = self.training_sums(theta)
        with np.errstate(divide="ignore"):
            out = np.log(rho)
        bad = np.argwhere((rho <= 0) & self.V & (self.T.sum(1) > 0)[:, None])
        for i, j in bad:
            t = self.masks.training[i]
            out[i, j] = (logsumexp(-self.d2[j, t] / (2 * theta * theta))
                         - math.log(2 * math.pi * theta * theta))
        return out


def ppl_innovations(folds: KernelFolds, theta: float, f: Power = Inverse,
                    grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """Fold innovations with ``h = f(p/(1-p) * rho_hat(.; training))``."""
    z = folds.w * folds.training_sums(theta)
    with np.errstate(divide="ignore", over="ignore"):
        terms = np.where(folds.V, np.power(z, f.exponent), 0.0)
    sums = terms.sum(1)
    if f.exponent == -1:
        # the Gaussian estimate is positive on all of W whenever training is non-empty
        integral = np.where(folds.T.sum(1) > 0, folds.x.window.area, 0.0)
    else:
        grid = grid or default_grid(folds.x.window)
        surf = folds.w * fold_surfaces(folds.x, folds.masks.training, theta, grid)
        integral = f.times_identity(surf).sum(1) * grid.cell_area
    return sums - integral


def select_bandwidth_ppl(x: PointPattern, scheme: CvScheme, f: Power = Inverse,
                         loss: str = "L2", seed: Seed = 0,
                         bounds: Optional[tuple] = None, tol: float = 1e-3,
                         grid: Optional[QuadratureGrid] = None,
                         masks: Optional[FoldMasks] = None) -> BandwidthFit:
    masks = masks if masks is not None else scheme_masks(x, scheme, seed)
    folds = KernelFolds(x, masks)
    if not folds.indicators.any():
        raise ValueError("no admissible folds")

    def objective(theta):
        return loss_from_arrays(ppl_innovations(folds, theta, f, grid), folds.indicators, loss)

    theta, value, land = log_scale_search(objective, bounds or bandwidth_bounds(x.window), tol)
    return BandwidthFit(theta, "ppl", value, loss, f.name, "local", land)


def cvl_statistic(x: PointPattern, theta: float) -> float:
    """``sum_x 1 / rho_hat(x; x)`` with the point itself included and no edge correction."""
    rho = gaussian_kernel(cdist(x.xy, x.xy, "sqeuclidean"), theta).sum(1)
    return float(np.sum(1.0 / rho))


def select_bandwidth_cvl(x: PointPattern, bounds: Optional[tuple] = None, tol: float = 1e-3,
                         grid: Optional[QuadratureGrid] = None) -> BandwidthFit:
    if len(x) == 0:
        raise ValueError("empty pattern")
    d2 = cdist(x.xy, x.xy, "sqeuclidean")
    area = x.window.area

    def objective(theta):
        s = float(np.sum(1.0 / gaussian_kernel(d2, theta).sum(1)))
        return (s - area) ** 2

    theta, value, land = log_scale_search(objective, bounds or bandwidth_bounds(x.window), tol)
    return BandwidthFit(theta, "cvl", value, None, "inverse", "local", land)


def poisson_lik_cv_terms(folds: KernelFolds, theta: float) -> tuple:
    """Per-fold log-likelihoods of the validation sets and their usable-fold flags."""
    logrho = folds.log_training_sums(theta) + math.log(folds.w)
    mass = local_edge_weights(folds.x.xy, theta, folds.x.window)
    integral = folds.w * (folds.T @ mass)
    ll = np.where(folds.V, logrho, 0.0).sum(1)
    ok = folds.indicators & np.isfinite(ll)
    return np.where(ok, ll - integral, 0.0), ok


def select_bandwidth_poisson_lik_cv(x: PointPattern, scheme: CvScheme, seed: Seed = 0,
                                    bounds: Optional[tuple] = None, tol: float = 1e-3,
                                    grid: Optional[QuadratureGrid] = None,
                                    masks: Optional[FoldMasks] = None) -> BandwidthFit:
    """Maximise the thinned Poisson likelihood of the validation sets."""
    masks = masks if masks is not None else scheme_masks(x, scheme, seed)
    folds = KernelFolds(x, masks)

    def objective(theta):
        ll, ok = poisson_lik_cv_terms(folds, theta)
        if not ok.any():
            return math.inf
        return -float(ll.sum() / len(ll))

    theta, value, land = log_scale_search(objective, bounds or bandwidth_bounds(x.window), tol)
    return BandwidthFit(theta, "poisson_lik_cv", -value, None, None, "local", land)
