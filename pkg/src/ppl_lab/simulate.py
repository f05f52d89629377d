"""Seeded simulators for Poisson, log-Gaussian Cox, hard-core and determinantal processes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .geometry import UNIT_SQUARE, PointPattern, QuadratureGrid, Window

Seed = Union[int, np.random.Generator]


def as_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit seed from a tuple of non-negative integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def _uniform(rng: np.random.Generator, n: int, w: Window) -> np.ndarray:
    u = rng.random((n, 2))
    return np.column_stack([w.x_min + u[:, 0] * w.width, w.y_min + u[:, 1] * w.height])


# -- Poisson ---------------------------------------------------------------

def simulate_poisson(intensity, w: Window = UNIT_SQUARE, seed: Seed = 0,
                     bound: float | None = None, grid_resolution: int = 128) -> PointPattern:
    """Poisson process with constant or spatially varying intensity.

    Inhomogeneous intensities are simulated by thinning a homogeneous process
    with rate ``bound``; if not supplied, the bound is the grid maximum times 1.01.
    """
    rng = as_rng(seed)
    if not callable(intensity):
        rho = float(intensity)
        if not math.isfinite(rho) or rho < 0:
            raise ValueError("intensity must be finite and non-negative")
        n = rng.poisson(rho * w.area)
        return PointPattern(_uniform(rng, n, w), w, check=False)

    if bound is None:
        nodes = QuadratureGrid(w, grid_resolution).cell_centers
        vals = np.asarray(intensity(nodes), dtype=float)
        if not np.all(np.isfinite(vals)) or vals.min() < 0:
            raise ValueError("intensity must be finite and non-negative on the window")
        bound = 1.01 * float(vals.max())
    if not math.isfinite(bound) or bound < 0:
        raise ValueError("intensity bound must be finite and non-negative")
    if bound == 0:
        return PointPattern.empty(w)
    n = rng.poisson(bound * w.area)
    xy = _uniform(rng, n, w)
    ratio = np.asarray(intensity(xy), dtype=float) / bound if n else np.empty(0)
    if n and (np.any(ratio < 0) or np.any(ratio > 1) or not np.all(np.isfinite(ratio))):
        raise ValueError("intensity is negative or exceeds its bound")
    keep = rng.random(n) < ratio
    return PointPattern(xy[keep], w, check=False)


# -- log-Gaussian Cox ------------------------------------------------------

@dataclass(frozen=True)
class GaussianFieldSpec:
    """Gaussian field with exponential covariance ``variance * exp(-decay * d)``.

    ``mean`` is a number or a field callable; it is the mean of the log-intensity.
    """

    mean: Union[float, Callable] = 0.0
    variance: float = 1.0
    decay: float = 1.0
    resolution: int = 64

    def __post_init__(self):
        if self.variance < 0 or self.decay <= 0 or self.resolution < 1:
            raise ValueError("invalid Gaussian field specification")

    def mean_on(self, nodes: np.ndarray) -> np.ndarray:
        if callable(self.mean):
            return np.asarray(self.mean(nodes), dtype=float)
        return np.full(len(nodes), float(self.mean))


_JITTERS = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)


@lru_cache(maxsize=4)
def _field_factor(variance: float, decay: float, w: Window, resolution: int) -> np.ndarray:
    nodes = QuadratureGrid(w, resolution).cell_centers
    cov = variance * np.exp(-decay * cdist(nodes, nodes))
    for jitter in _JITTERS:
        try:
            return linalg.cholesky(cov + jitter * variance * np.eye(len(cov)),
                                   lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
    raise linalg.LinAlgError("covariance factorization failed after maximum jitter")


def simulate_gaussian_field(spec: GaussianFieldSpec, w: Window, rng: np.random.Generator) -> np.ndarray:
    """Field values at the ``resolution x resolution`` cell centres (flat, x-major)."""
    grid = QuadratureGrid(w, spec.resolution)
    mu = spec.mean_on(grid.cell_centers)
    if spec.variance == 0:
        return mu
    L = _field_factor(float(spec.variance), float(spec.decay), w, spec.resolution)
    return mu + L @ rng.standard_normal(len(mu))


def simulate_lgcp(spec: GaussianFieldSpec, w: Window = UNIT_SQUARE, seed: Seed = 0) -> PointPattern:
    """LGCP with piecewise-constant random intensity ``exp(Z)`` on the field grid."""
    rng = as_rng(seed)
    grid = QuadratureGrid(w, spec.resolution)
    lam = np.exp(simulate_gaussian_field(spec, w, rng))
    counts = rng.poisson(lam * grid.cell_area)
    corners = np.repeat(grid.cell_centers - [grid.dx / 2, grid.dy / 2], counts, axis=0)
    offs = rng.random((len(corners), 2)) * [grid.dx, grid.dy]
    return PointPattern(corners + offs, w, check=False)


# -- hard-core -------------------------------------------------------------

@dataclass(frozen=True)
class HardCoreSpec:
    beta: float
    R: float
    burn_in: int = 100_000

    def __post_init__(self):
        if self.beta < 0 or self.R < 0 or self.burn_in < 1:
            raise ValueError("invalid hard-core specification")


def simulate_hardcore(spec: HardCoreSpec, w: Window = UNIT_SQUARE, seed: Seed = 0) -> PointPattern:
    """Metropolis-Hastings birth-death sampler for the hard-core process.

    Runs ``burn_in`` proposals from the empty configuration; births are uniform
    on the window, deaths pick a uniform existing point.
    """
    rng = as_rng(seed)
    B = spec.burn_in
    birth = rng.random(B) < 0.5
    pos = _uniform(rng, B, w)
    accept = rng.random(B)
    pick = rng.random(B)
    bw = spec.beta * w.area
    r2 = spec.R * spec.R
    cap = 64
    pts = np.empty((cap, 2))
    n = 0
    for t in range(B):
        if birth[t]:
            if accept[t] * (n + 1) >= bw:
                continue
            u = pos[t]
            if n and (((pts[:n] - u) ** 2).sum(1) <= r2).any():
                continue
            if n == cap:
                cap *= 2
                pts = np.resize(pts, (cap, 2))
            pts[n] = u
            n += 1
        elif n and accept[t] * bw < n:
            i = int(pick[t] * n)
            pts[i] = pts[n - 1]
            n -= 1
    return PointPattern(pts[:n].copy(), w, check=False)


# -- determinantal ---------------------------------------------------------

@dataclass(frozen=True)
class DppSpec:
    """Stationary DPP with kernel ``intensity * exp(-decay * d)``.

    ``truncation`` is the largest absolute Fourier index per axis; ``None``
    picks the smallest value retaining ``mass_target`` of the spectral mass.
    """

    intensity: float
    decay: float
    truncation: int | None = None
    mass_target: float = 0.99

    def __post_init__(self):
        if self.intensity <= 0 or self.decay <= 0:
            raise ValueError("invalid DPP specification")


def _exp_kernel_spectrum(intensity: float, decay: float, w: Window, K: int):
    k1 = np.arange(-K, K + 1) * (2 * np.pi / w.width)
    k2 = np.arange(-K, K + 1) * (2 * np.pi / w.height)
    om2 = k1[:, None] ** 2 + k2[None, :] ** 2
    lam = intensity * 2 * np.pi * decay / (decay ** 2 + om2) ** 1.5
    return lam, k1, k2


@lru_cache(maxsize=8)
def dpp_spectrum(spec: DppSpec, w: Window):
    """Clamped eigenvalues and angular frequencies of the periodised kernel."""
    target = spec.mass_target * spec.intensity * w.area
    if spec.truncation is not None:
        K = int(spec.truncation)
        lam, k1, k2 = _exp_kernel_spectrum(spec.intensity, spec.decay, w, K)
        if lam.sum() < target:
            raise ValueError("truncation retains less than the required spectral mass")
    else:
        K = 16
        while True:
            lam, k1, k2 = _exp_kernel_spectrum(spec.intensity, spec.decay, w, K)
            if lam.sum() >= target:
                break
            K = int(K * 1.5)
    if lam.max() > 1 + 1e-6:
        raise ValueError("kernel not valid")
    lam = np.clip(lam, 0.0, 1.0)
    om = np.stack(np.meshgrid(k1, k2, indexing="ij"), -1).reshape(-1, 2)
    lam = lam.ravel()
    keep = lam > 1e-12
    return lam[keep], om[keep]


def _sample_projection(om: np.ndarray, w: Window, rng: np.random.Generator) -> np.ndarray:
    N = len(om)
    out = np.empty((N, 2))
    E = np.zeros((N, N), dtype=complex)
    origin = np.array([w.x_min, w.y_min])
    for j in range(N):
        remaining = N - j
        while True:
            B = int(2 * N / remaining) + 8
            cand = _uniform(rng, B, w)
            V = np.exp(1j * (om @ (cand - origin).T))
            proj = E[:, :j].conj().T @ V
            dens = N - (np.abs(proj) ** 2).sum(0)
            hit = np.flatnonzero(rng.random(B) * N < dens)
            if len(hit):
                break
        h = hit[0]
        out[j] = cand[h]
        v = V[:, h]
        for _ in range(2):
            v = v - E[:, :j] @ (E[:, :j].conj().T @ v)
        E[:, j] = v / np.linalg.norm(v)
    return out


def simulate_dpp(spec: DppSpec, w: Window = UNIT_SQUARE, seed: Seed = 0) -> PointPattern:
    """Spectral simulation: Bernoulli mode selection, then sequential projection sampling."""
    rng = as_rng(seed)
    lam, om = dpp_spectrum(spec, w)
    chosen = om[rng.random(len(lam)) < lam]
    if len(chosen) == 0:
        return PointPattern.empty(w)
    return PointPattern(_sample_projection(chosen, w, rng), w, check=False)


# -- thinning --------------------------------------------------------------

def thin_independent(x: PointPattern, retention, seed: Seed = 0):
    """Independent thinning; returns ``(retained, removed)``."""
    rng = as_rng(seed)
    if callable(retention):
        p = np.asarray(retention(x.xy), dtype=float) if len(x) else np.empty(0)
    else:
        p = np.full(len(x), float(retention))
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("retention values must lie in [0, 1]")
    keep = rng.random(len(x)) < p
    return x.subset(keep), x.subset(~keep)
