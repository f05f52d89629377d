"""Rectangular windows, point patterns and grid quadrature."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.spatial import cKDTree


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle ``[x_min, x_max] x [y_min, y_max]``."""

    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("window bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("window must have x_min < x_max and y_min < y_max")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def shorter_side(self) -> float:
        return min(self.width, self.height)

    def contains(self, xy: np.ndarray) -> np.ndarray:
        xy = np.atleast_2d(xy)
        return ((xy[:, 0] >= self.x_min) & (xy[:, 0] <= self.x_max)
                & (xy[:, 1] >= self.y_min) & (xy[:, 1] <= self.y_max))

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max,
                "y_min": self.y_min, "y_max": self.y_max}

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        return cls(float(d["x_min"]), float(d["x_max"]),
                   float(d["y_min"]), float(d["y_max"]))


UNIT_SQUARE = Window()


class PointPattern:
    """A finite simple point pattern observed in a window.

    Coordinates are held as a read-only ``(n, 2)`` float array.
    """

    __slots__ = ("_xy", "window")

    def __init__(self, xy, window: Window = UNIT_SQUARE, check: bool = True):
        arr = np.array(xy, dtype=float).reshape(-1, 2)
        if check:
            if not np.all(np.isfinite(arr)):
                raise ValueError("point coordinates must be finite")
            if not np.all(window.contains(arr)):
                raise ValueError("all points must lie inside the window")
            if len(arr) > 1 and len(np.unique(arr, axis=0)) != len(arr):
                raise ValueError("coincident points are not allowed")
        arr.setflags(write=False)
        self._xy = arr
        self.window = window

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def __len__(self) -> int:
        return len(self._xy)

    def __iter__(self):
        return (Point(float(a), float(b)) for a, b in self._xy)

    def __repr__(self) -> str:
        return f"PointPattern(n={len(self)}, window={self.window})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointPattern):
            return NotImplemented
        return self.window == other.window and np.array_equal(self._xy, other._xy)

    def subset(self, mask) -> "PointPattern":
        """Sub-pattern selected by a boolean mask or index array."""
        return PointPattern(self._xy[mask], self.window, check=False)

    @classmethod
    def empty(cls, window: Window = UNIT_SQUARE) -> "PointPattern":
        return cls(np.empty((0, 2)), window, check=False)


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def min_pairwise_distance(x: PointPattern) -> float:
    if len(x) < 2:
        raise ValueError("insufficient points")
    tree = cKDTree(x.xy)
    d, _ = tree.query(x.xy, k=2)
    return float(d[:, 1].min())


def nearest_distance(targets: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Distance from each target location to its nearest source point (inf if none)."""
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    if len(sources) == 0:
        return np.full(len(targets), np.inf)
    d, _ = cKDTree(sources).query(targets, k=1)
    return d


class QuadratureGrid:
    """Uniform ``G x G`` midpoint grid covering a window."""

    def __init__(self, window: Window = UNIT_SQUARE, resolution: int = 128):
        if int(resolution) != resolution or resolution < 1:
            raise ValueError("resolution must be a positive integer")
        self.window = window
        self.resolution = G = int(resolution)
        self.dx = window.width / G
        self.dy = window.height / G
        self.x_centers = window.x_min + (np.arange(G) + 0.5) * self.dx
        self.y_centers = window.y_min + (np.arange(G) + 0.5) * self.dy
        gx, gy = np.meshgrid(self.x_centers, self.y_centers, indexing="ij")
        # row-major in x: node (i, j) sits at flat index i * G + j
        self.cell_centers = np.column_stack([gx.ravel(), gy.ravel()])
        self.cell_centers.setflags(write=False)
        self.cell_area = self.dx * self.dy

    def __repr__(self) -> str:
        return f"QuadratureGrid(resolution={self.resolution}, window={self.window})"

    def covers(self, window: Window) -> bool:
        return self.window == window


@lru_cache(maxsize=16)
def default_grid(window: Window = UNIT_SQUARE, resolution: int = 128) -> QuadratureGrid:
    return QuadratureGrid(window, resolution)


def integrate_on_window(f, w: Window, grid: QuadratureGrid) -> float:
    """Integral of ``f`` over ``w``.

    ``f`` is either a vectorised callable on ``(m, 2)`` arrays (midpoint rule)
    or an object with ``cell_integrals(grid)`` giving exact per-cell integrals.
    """
    if not grid.covers(w):
        raise ValueError("grid does not cover the window")
    if hasattr(f, "cell_integrals"):
        vals = f.cell_integrals(grid)
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite integrand")
        return float(vals.sum())
    vals = np.broadcast_to(np.asarray(f(grid.cell_centers), dtype=float),
                           (len(grid.cell_centers),))
    if not np.all(np.isfinite(vals)):
        bad = grid.cell_centers[np.argmax(~np.isfinite(vals))]
        raise ValueError(f"non-finite integrand at {tuple(bad)}")
    return float(vals.sum() * grid.cell_area)


def coverage_distances(x: PointPattern, grid: QuadratureGrid) -> np.ndarray:
    """Sorted nearest-point distances of the grid nodes; feeds ``uncovered_area_from``."""
    return np.sort(nearest_distance(grid.cell_centers, x.xy))


def uncovered_area_from(sorted_dist: np.ndarray, R, cell_area: float):
    """|W minus union of closed R-balls| from sorted node distances, vectorised in R."""
    covered = np.searchsorted(sorted_dist, R, side="right")
    return (len(sorted_dist) - covered) * cell_area


def uncovered_area(x: PointPattern, R: float, w: Window, grid: QuadratureGrid) -> float:
    if R < 0:
        raise ValueError("R must be non-negative")
    if len(x) == 0 or R == 0:
        return w.area
    d = nearest_distance(grid.cell_centers, x.xy)
    return float(np.count_nonzero(d > R) * grid.cell_area)


FieldFn = Callable[[np.ndarray], np.ndarray]
