"""Replicate-level error summaries for scalar estimates and intensity surfaces."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import QuadratureGrid


@dataclass(frozen=True)
class ScalarMetricSet:
    """Population-variance convention, so ``mse == bias**2 + variance``."""

    bias: float
    abs_bias: float
    variance: float
    mse: float
    bias_se: float
    mse_se: float
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


def scalar_metrics(estimates, truth: float) -> ScalarMetricSet:
    e = np.asarray(estimates, dtype=float)
    if e.size < 2:
        raise ValueError("need at least two estimates")
    err = e - truth
    bias = float(err.mean())
    var = float(e.var())
    mse = float((err ** 2).mean())
    n = e.size
    return ScalarMetricSet(bias, abs(bias), var, mse,
                           float(err.std(ddof=1) / math.sqrt(n)),
                           float((err ** 2).std(ddof=1) / math.sqrt(n)), n)


@dataclass(frozen=True)
class SurfaceMetricSet:
    iab: float
    isb: float
    iv: float
    mise: float

    def as_dict(self) -> dict:
        return asdict(self)


def surface_metrics(estimated_surfaces, truth, grid: QuadratureGrid) -> SurfaceMetricSet:
    """IAB, ISB, IV and MISE of replicate surfaces against the true intensity on ``grid``."""
    S = np.atleast_2d(np.asarray(estimated_surfaces, dtype=float))
    t = np.asarray(truth, dtype=float).ravel()
    m = grid.resolution ** 2
    if S.shape[1] != m or t.size != m:
        raise ValueError("surfaces do not match the metric grid")
    mean = S.mean(0)
    a = grid.cell_area
    iab = float(np.abs(mean - t).sum() * a)
    isb = float(((mean - t) ** 2).sum() * a)
    iv = float(S.var(0).sum() * a)
    return SurfaceMetricSet(iab, isb, iv, isb + iv)
