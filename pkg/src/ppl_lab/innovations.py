"""Test functions, estimator families and first-order innovations."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .cv import CvSplit
from .geometry import PointPattern, QuadratureGrid, Window, nearest_distance
from .kernel import kernel_intensity

WEIGHT_KINDS = ("product_density", "papangelou", "nonparametric")


# -- test functions ----------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    c: float = 1.0
    pattern_free = True

    def __call__(self, u: np.ndarray, xi_vals=None) -> np.ndarray:
        return np.full(len(np.atleast_2d(u)), float(self.c))

    def cell_integrals(self, grid: QuadratureGrid) -> np.ndarray:
        return np.full(grid.resolution ** 2, self.c * grid.cell_area)


def _power_antiderivative_diff(lo: np.ndarray, hi: np.ndarray, g: float) -> np.ndarray:
    if g == -1.0:
        with np.errstate(divide="ignore"):
            return np.log(hi) - np.log(lo)
    with np.errstate(divide="ignore"):
        return (hi ** (g + 1) - lo ** (g + 1)) / (g + 1)


@dataclass(frozen=True)
class CoordPower:
    """``h(u) = u1**gamma * u2**gamma``; cell integrals are exact."""

    gamma: float
    pattern_free = True

    def check_window(self, w: Window) -> None:
        if (self.gamma < 0 or self.gamma != int(self.gamma)) and (w.x_min < 0 or w.y_min < 0):
            raise ValueError("CoordPower with this exponent needs a window in the positive quadrant")

    def __call__(self, u: np.ndarray, xi_vals=None) -> np.ndarray:
        u = np.atleast_2d(u)
        with np.errstate(divide="ignore"):
            return (u[:, 0] ** self.gamma) * (u[:, 1] ** self.gamma)

    def cell_integrals(self, grid: QuadratureGrid) -> np.ndarray:
        w = grid.window
        self.check_window(w)
        if self.gamma <= -1 and (w.x_min <= 0 or w.y_min <= 0):
            raise ValueError(f"integral of CoordPower({self.gamma:g}) diverges on a window "
                             "touching the axes")
        ex = np.append(grid.x_centers - grid.dx / 2, grid.window.x_max)
        ey = np.append(grid.y_centers - grid.dy / 2, grid.window.y_max)
        ix = _power_antiderivative_diff(ex[:-1], ex[1:], self.gamma)
        iy = _power_antiderivative_diff(ey[:-1], ey[1:], self.gamma)
        return np.outer(ix, iy).ravel()


FShape = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Power:
    """``f(z) = z**exponent``; ``Inverse`` and ``InverseSqrt`` are the common cases."""

    exponent: float

    def __call__(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.power(z, self.exponent)

    def times_identity(self, z: np.ndarray) -> np.ndarray:
        """``z * f(z)`` with the value 0 off the support ``z == 0``."""
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.power(z[pos], self.exponent + 1)
        return out

    @property
    def name(self) -> str:
        if self.exponent == -1:
            return "inverse"
        if self.exponent == -0.5:
            return "inverse_sqrt"
        return f"power({self.exponent:g})"


Inverse = Power(-1.0)
InverseSqrt = Power(-0.5)


def f_from_name(name: str) -> Power:
    table = {"inverse": Inverse, "1/x": Inverse, "inverse_sqrt": InverseSqrt, "1/sqrt(x)": InverseSqrt}
    if name in table:
        return table[name]
    if name.startswith("power(") and name.endswith(")"):
        return Power(float(name[6:-1]))
    raise ValueError(f"unknown test-function shape {name!r}")


@dataclass(frozen=True)
class XiTransform:
    """``h(u; y) = f(weight * xi(u; y))`` with the weight supplied by the innovation."""

    f: Power = Inverse
    pattern_free = False


# -- estimator families --------------------------------------------------------

class ConstantIntensity:
    pattern_free = True

    def __init__(self, theta: float):
        self.theta = float(theta)

    def at(self, u: np.ndarray, y: Optional[PointPattern] = None) -> np.ndarray:
        return np.full(len(np.atleast_2d(u)), self.theta)


class ParametricIntensity:
    pattern_free = True

    def __init__(self, field: Callable[[np.ndarray], np.ndarray]):
        self.field = field

    def at(self, u: np.ndarray, y: Optional[PointPattern] = None) -> np.ndarray:
        return np.asarray(self.field(np.atleast_2d(u)), dtype=float)


class HardCorePapangelou:
    """``beta * 1{d(u, y) > R}``; balls are closed."""

    pattern_free = False

    def __init__(self, beta: float, R: float):
        if beta <= 0 or R < 0:
            raise ValueError("hard-core parameters must satisfy beta > 0, R >= 0")
        self.beta, self.R = float(beta), float(R)

    def at(self, u: np.ndarray, y: PointPattern) -> np.ndarray:
        d = nearest_distance(u, y.xy)
        return np.where(d > self.R, self.beta, 0.0)


class KernelIntensity:
    pattern_free = False

    def __init__(self, bandwidth: float, edge_mode: str = "none"):
        self.bandwidth = float(bandwidth)
        self.edge_mode = edge_mode

    def at(self, u: np.ndarray, y: PointPattern) -> np.ndarray:
        return kernel_intensity(y, self.bandwidth, u, self.edge_mode)


# -- innovations -------------------------------------------------------------

@dataclass(frozen=True)
class InnovationValue:
    value: float
    fold: int = 0
    indicator: int = 1
    infeasible: bool = False
    reason: Optional[str] = None

    @property
    def weighted(self) -> float:
        """``I_i * value``; an infeasible counted fold is ``+inf``."""
        if not self.indicator:
            return 0.0
        return math.inf if self.infeasible else self.value


def _leave_one_out(xi, x: PointPattern) -> np.ndarray:
    if xi.pattern_free:
        return xi.at(x.xy)
    xy = x.xy
    out = np.empty(len(x))
    for i in range(len(x)):
        rest = PointPattern(np.delete(xy, i, axis=0), x.window, check=False)
        out[i] = xi.at(xy[i:i + 1], rest)[0]
    return out


def _weighted_integral(xi, h, y: Optional[PointPattern], weight: float,
                       grid: QuadratureGrid, full_support: bool) -> float:
    """``weight * int_W h(u; y) xi(u; y) du``."""
    if isinstance(h, XiTransform):
        z = weight * xi.at(grid.cell_centers, y)
        if full_support and h.f.exponent == -1:
            vals = np.ones_like(z)
        else:
            vals = h.f.times_identity(z)
        total = float(vals.sum() * grid.cell_area)
    else:
        cells = (h.cell_integrals(grid) if hasattr(h, "cell_integrals")
                 else h(grid.cell_centers) * grid.cell_area)
        total = weight * float((xi.at(grid.cell_centers, y) * cells).sum())
    if not math.isfinite(total):
        raise ValueError("non-finite integrand")
    return total


def _h_at(h, xi_vals: np.ndarray, u: np.ndarray, weight: float) -> np.ndarray:
    if isinstance(h, XiTransform):
        return h.f(weight * xi_vals)
    return h(u)


def univariate_innovation(xi, h, x: PointPattern, grid: QuadratureGrid,
                          full_support: bool = False) -> float:
    """``sum_x h(x; x - {x}) - int_W h(u; x) xi(u; x) du``."""
    if not grid.covers(x.window):
        raise ValueError("grid does not cover the window")
    if len(x):
        xi_loo = _leave_one_out(xi, x) if isinstance(h, XiTransform) else None
        terms = _h_at(h, xi_loo, x.xy, 1.0)
        bad = ~np.isfinite(terms)
        if bad.any():
            raise ValueError(f"non-finite innovation term at {tuple(float(c) for c in x.xy[np.argmax(bad)])}")
        s = float(terms.sum())
    else:
        s = 0.0
    return s - _weighted_integral(xi, h, x, 1.0, grid, full_support)


def bivariate_innovation(xi, h, split: CvSplit, weight_kind: str, grid: QuadratureGrid,
                         indicator: Optional[int] = None,
                         full_support: bool = False) -> InnovationValue:
    """Fold innovation with the weight convention of ``weight_kind``.

    ``product_density``: ``sum_{x in T} h(x) - (1-p) int h xi``.
    Otherwise: ``sum_{v in V} h(v; T) - p/(1-p) int h(u; T) xi(u; T) du``.
    Passing ``indicator=1`` disables the default fold indicator.
    """
    if weight_kind not in WEIGHT_KINDS:
        raise ValueError(f"weight kind must be one of {WEIGHT_KINDS}")
    p = split.p
    if not (0.0 < p < 1.0):
        raise ValueError("retention must lie in (0, 1)")
    T, V = split.training, split.validation
    n_src = len(T) + len(V) + (len(split.evaluation) if split.evaluation is not None else 0)
    if weight_kind == "product_density":
        if not (xi.pattern_free and (h.pattern_free or isinstance(h, XiTransform))):
            raise ValueError("product-density innovations need pattern-free xi and h")
        w, pts, cond = 1.0 - p, T, None
        auto = int(len(T) >= 1)
    else:
        w, pts, cond = p / (1.0 - p), V, T
        auto = int(1 <= len(T) <= n_src - 1)
    ind = auto if indicator is None else int(indicator)

    if len(pts):
        xi_pts = xi.at(pts.xy, cond) if isinstance(h, XiTransform) else None
        terms = _h_at(h, xi_pts, pts.xy, w)
        if np.isnan(terms).any():
            raise ValueError("undefined innovation term")
        if np.isinf(terms).any():
            reason = (f"infeasible(R={xi.R:g})" if isinstance(xi, HardCorePapangelou)
                      else "infeasible")
            return InnovationValue(math.inf, split.fold, ind, True, reason)
        s = float(terms.sum())
    else:
        s = 0.0
    return InnovationValue(s - _weighted_integral(xi, h, cond, w, grid, full_support),
                           split.fold, ind)


def hardcore_feasible_range(splits: list[CvSplit]) -> float:
    """Smallest validation-to-training distance over folds with ``I_i = 1``."""
    best = math.inf
    counted = 0
    for s in splits:
        n_src = len(s.training) + len(s.validation)
        if not (1 <= len(s.training) <= n_src - 1):
            continue
        counted += 1
        best = min(best, float(nearest_distance(s.validation.xy, s.training.xy).min()))
    if counted == 0:
        raise ValueError("no admissible folds")
    return best
