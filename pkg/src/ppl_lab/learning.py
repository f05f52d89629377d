"""Innovation-based losses and the derivative-free search used to minimise them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .innovations import InnovationValue, bivariate_innovation

LOSS_KINDS = ("L1", "L2", "L3")
_INV_PHI = (math.sqrt(5) - 1) / 2


def _check_kind(kind: str) -> None:
    if kind not in LOSS_KINDS:
        raise ValueError(f"loss kind must be one of {LOSS_KINDS}")


def loss_from_arrays(values: np.ndarray, indicators: np.ndarray, kind: str) -> float:
    """Loss from raw fold innovations; a counted non-finite fold gives ``+inf``."""
    _check_kind(kind)
    values = np.asarray(values, dtype=float)
    ind = np.asarray(indicators, dtype=bool)
    if values.size == 0:
        raise ValueError("loss needs at least one fold")
    if np.any(ind & ~np.isfinite(values)):
        return math.inf
    t = np.where(ind, values, 0.0)
    with np.errstate(over="ignore"):
        if kind == "L1":
            return float(np.abs(t).mean())
        if kind == "L2":
            return float((t * t).mean())
        return float(t.mean() ** 2)


def loss_matrix(values: np.ndarray, indicators: np.ndarray, kind: str) -> np.ndarray:
    """Row-wise losses for a ``(m, k)`` array of innovations at ``m`` parameters."""
    _check_kind(kind)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    ind = np.broadcast_to(np.asarray(indicators, dtype=bool), values.shape)
    bad = np.any(ind & ~np.isfinite(values), axis=1)
    t = np.where(ind, values, 0.0)
    t[~np.isfinite(t)] = 0.0
    with np.errstate(over="ignore"):
        if kind == "L1":
            out = np.abs(t).mean(1)
        elif kind == "L2":
            out = (t * t).mean(1)
        else:
            out = t.mean(1) ** 2
    out[bad] = np.inf
    return out


def loss(values: Sequence[InnovationValue], kind: str) -> float:
    values = list(values)
    if not values:
        raise ValueError("loss needs at least one fold")
    v = np.array([iv.value for iv in values], dtype=float)
    v[np.array([iv.infeasible for iv in values])] = np.inf
    return loss_from_arrays(v, [iv.indicator for iv in values], kind)


# -- search ----------------------------------------------------------------

@dataclass(frozen=True)
class SearchSpec:
    """Box-constrained search.

    ``method`` is ``"grid"`` (multi-level grid refinement, any dimension) or
    ``"golden"`` (1-D golden section). ``log_scale`` searches in log-parameter
    space, where ``tol`` is then a relative tolerance.
    """

    bounds: tuple
    method: str = "grid"
    tol: float = 1e-6
    points: int = 33
    levels: int = 3
    zoom: float = 5.0
    log_scale: bool = False
    center_plateau: bool = True

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(b)) or np.any(b[:, 0] >= b[:, 1]):
            raise ValueError("search bounds must be finite with lo < hi")
        if self.log_scale and np.any(b[:, 0] <= 0):
            raise ValueError("log-scale search needs positive bounds")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.method not in ("grid", "golden"):
            raise ValueError("method must be 'grid' or 'golden'")
        if self.method == "golden" and len(b) != 1:
            raise ValueError("golden section is one-dimensional")
        if self.points < 3 or self.levels < 1 or self.zoom <= 1:
            raise ValueError("invalid grid refinement settings")
        object.__setattr__(self, "bounds", tuple(map(tuple, b.tolist())))

    @property
    def dim(self) -> int:
        return len(self.bounds)


@dataclass
class SearchResult:
    theta: np.ndarray
    value: float
    trace: list = field(default_factory=list)

    @property
    def scalar(self) -> float:
        return float(self.theta[0])


def _golden(g: Callable[[float], float], lo: float, hi: float, tol: float, trace: list):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    trace += [(c, fc), (d, fd)]
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = g(c)
            trace.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = g(d)
            trace.append((d, fd))
    t = 0.5 * (a + b)
    return t, g(t)


def _grid_refine(g, lo: np.ndarray, hi: np.ndarray, spec: SearchSpec, trace: list):
    lo0, hi0 = lo.copy(), hi.copy()
    best_t, best_v = None, math.inf
    level = 0
    while True:
        axes = [np.linspace(a, b, spec.points) for a, b in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(lo))
        vals = np.array([g(t) for t in mesh])
        trace += list(zip(map(tuple, mesh), vals))
        i = int(np.argmin(vals))
        if vals[i] < best_v or best_t is None:
            best_t, best_v = mesh[i], float(vals[i])
        if not math.isfinite(best_v):
            raise ValueError("no feasible parameter")
        level += 1
        step = (hi - lo) / (spec.points - 1)
        if (level >= spec.levels and np.all(step <= spec.tol)) or level >= 60:
            break
        half = (hi - lo) / spec.zoom / 2
        lo = np.maximum(lo0, best_t - half)
        hi = np.minimum(hi0, best_t + half)
    return best_t, best_v


def _plateau_center(g, t: float, v: float, lo: float, hi: float, tol: float):
    """Midpoint of the near-flat set of ``g`` around a found minimiser ``t``."""
    eps = 1e-10 * max(abs(v), 1e-300) + 1e-300

    def edge(direction: int, bound: float) -> float:
        inside, step = t, tol
        while True:
            probe = t + direction * step
            if (probe - bound) * direction >= 0:
                if g(bound) <= v + eps:
                    return bound
                outside = bound
                break
            if g(probe) > v + eps:
                outside = probe
                break
            inside, step = probe, step * 2
        while abs(outside - inside) > tol:
            mid = 0.5 * (inside + outside)
            if g(mid) <= v + eps:
                inside = mid
            else:
                outside = mid
        return inside

    left, right = edge(-1, lo), edge(1, hi)
    c = 0.5 * (left + right)
    vc = g(c)
    return (c, vc) if vc <= v + eps else (t, v)


def minimize(loss_fn: Callable, search: SearchSpec) -> SearchResult:
    """Minimise ``loss_fn`` over the search box; deterministic given ``search``."""
    b = np.asarray(search.bounds, dtype=float)
    to_theta = np.exp if search.log_scale else (lambda s: s)
    lo, hi = (np.log(b[:, 0]), np.log(b[:, 1])) if search.log_scale else (b[:, 0], b[:, 1])
    trace: list = []
    cache: dict = {}

    def g(s):
        key = tuple(np.atleast_1d(s).tolist())
        if key not in cache:
            th = to_theta(np.asarray(key, dtype=float))
            val = float(loss_fn(th[0] if search.dim == 1 else th))
            cache[key] = val if not math.isnan(val) else math.inf
        return cache[key]

    if search.method == "golden":
        s, v = _golden(lambda z: g(z), lo[0], hi[0], search.tol, trace)
        s = np.array([s])
    else:
        s, v = _grid_refine(g, lo, hi, search, trace)
    if not math.isfinite(v):
        raise ValueError("no feasible parameter")
    if search.dim == 1 and search.center_plateau:
        c, v = _plateau_center(lambda z: g(z), float(s[0]), v, lo[0], hi[0], search.tol)
        s = np.array([c])
    theta = to_theta(np.asarray(s, dtype=float))
    trace = [(to_theta(np.atleast_1d(np.asarray(t, dtype=float))).tolist(), val) for t, val in trace]
    return SearchResult(theta, float(v), trace)


# -- per-fold estimates --------------------------------------------------------

def median_midpoint(values: np.ndarray) -> float:
    """Sample median; even counts use the midpoint of the central order statistics."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("median of an empty set")
    m = v.size // 2
    return float(v[m]) if v.size % 2 else float(0.5 * (v[m - 1] + v[m]))


@dataclass(frozen=True)
class FoldEstimates:
    """Per-fold minimisers over the counted folds."""

    thetas: np.ndarray
    folds: np.ndarray

    def __post_init__(self):
        if len(self.thetas) == 0:
            raise ValueError("no counted folds")

    @property
    def median(self) -> float:
        return median_midpoint(self.thetas)

    @property
    def mean(self) -> float:
        return float(np.mean(self.thetas))

    def combine(self, combiner: str) -> float:
        if combiner == "median":
            return self.median
        if combiner == "mean":
            return self.mean
        raise ValueError("combiner must be 'median' or 'mean'")


def per_fold_estimates(splits, xi_family: Callable, h, weight_kind: str,
                       search: SearchSpec, grid,
                       indicator: Optional[int] = None) -> FoldEstimates:
    """Minimise each counted fold's squared innovation over the family parameter."""
    thetas, folds = [], []
    for split in splits:
        upper = np.asarray(search.bounds)[:, 1]
        probe = bivariate_innovation(xi_family(upper[0] if search.dim == 1 else upper),
                                     h, split, weight_kind, grid, indicator)
        if not probe.indicator:
            continue

        def sq(theta, split=split):
            iv = bivariate_innovation(xi_family(theta), h, split, weight_kind, grid, indicator)
            return math.inf if iv.infeasible else iv.value ** 2

        res = minimize(sq, search)
        thetas.append(res.theta if search.dim > 1 else res.scalar)
        folds.append(split.fold)
    return FoldEstimates(np.asarray(thetas, dtype=float), np.asarray(folds, dtype=int))
