"""Small closed family of deterministic planar fields used by configs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearField:
    """``a + b*u1 + c*u2``."""

    a: float
    b: float = 0.0
    c: float = 0.0

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(u)
        return self.a + self.b * u[:, 0] + self.c * u[:, 1]

    def max_on(self, window) -> float:
        xs = (window.x_min, window.x_max)
        ys = (window.y_min, window.y_max)
        return max(self.a + self.b * x + self.c * y for x in xs for y in ys)

    def min_on(self, window) -> float:
        xs = (window.x_min, window.x_max)
        ys = (window.y_min, window.y_max)
        return min(self.a + self.b * x + self.c * y for x in xs for y in ys)


@dataclass(frozen=True)
class LogLinearField:
    """``log(a + b*u1 + c*u2)``; the log-mean of an LGCP with linear trend."""

    a: float
    b: float = 0.0
    c: float = 0.0

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return np.log(LinearField(self.a, self.b, self.c)(u))


def field_from_config(cfg):
    """Number -> constant; ``{"linear": [a, b, c]}``; ``{"log_linear": [a, b, c]}``."""
    if isinstance(cfg, (int, float)):
        return LinearField(float(cfg))
    if isinstance(cfg, dict):
        if "linear" in cfg:
            return LinearField(*map(float, cfg["linear"]))
        if "log_linear" in cfg:
            return LogLinearField(*map(float, cfg["log_linear"]))
    raise ValueError(f"unrecognised field config: {cfg!r}")


def field_to_config(field):
    if isinstance(field, LinearField):
        if field.b == 0 and field.c == 0:
            return field.a
        return {"linear": [field.a, field.b, field.c]}
    if isinstance(field, LogLinearField):
        return {"log_linear": [field.a, field.b, field.c]}
    raise ValueError(f"field {field!r} has no config form")
