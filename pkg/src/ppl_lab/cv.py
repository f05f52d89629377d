"""Cross-validation splittings built from independent thinnings.

Splits are stored as boolean masks over the source pattern so that fold-level
computations can be vectorised; ``CvSplit`` objects give the pattern view.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import PointPattern
from .simulate import Seed, as_rng


@dataclass(frozen=True)
class CvScheme:
    """``kind`` is ``"mccv"`` (needs ``p`` and ``k``) or ``"multinomial"`` (needs ``k``)."""

    kind: str
    k: int
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind == "mccv":
            if self.p is None or not (0.0 < self.p < 1.0):
                raise ValueError("MCCV requires p in (0, 1)")
            if self.k < 1:
                raise ValueError("MCCV requires k >= 1")
        elif self.kind == "multinomial":
            if self.k < 2:
                raise ValueError("multinomial CV requires k >= 2")
            if self.p is not None and not np.isclose(self.p, 1.0 / self.k):
                raise ValueError("multinomial CV has p = 1/k")
            object.__setattr__(self, "p", 1.0 / self.k)
        else:
            raise ValueError(f"unknown CV kind {self.kind!r}")

    @classmethod
    def mccv(cls, p: float, k: int) -> "CvScheme":
        return cls("mccv", int(k), float(p))

    @classmethod
    def multinomial(cls, k: int) -> "CvScheme":
        return cls("multinomial", int(k))

    @property
    def retention(self) -> float:
        return float(self.p)

    def to_dict(self) -> dict:
        if self.kind == "mccv":
            return {"kind": "mccv", "p": self.p, "k": self.k}
        return {"kind": "multinomial", "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "CvScheme":
        kind = d.get("kind")
        if kind == "mccv":
            return cls.mccv(float(d["p"]), int(d["k"]))
        if kind == "multinomial":
            return cls.multinomial(int(d["k"]))
        raise ValueError(f"unknown CV kind {kind!r}")


@dataclass(frozen=True)
class CvSplit:
    training: PointPattern
    validation: PointPattern
    p: float
    fold: int
    evaluation: Optional[PointPattern] = None


@dataclass(frozen=True)
class FoldMasks:
    """Boolean ``(k, n)`` membership masks of every fold over a source pattern."""

    source: PointPattern
    validation: np.ndarray
    training: np.ndarray
    p: float
    evaluation: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.validation.shape[0]

    def splits(self) -> list[CvSplit]:
        x = self.source
        out = []
        for i in range(self.k):
            ev = None if self.evaluation is None else x.subset(self.evaluation[i])
            out.append(CvSplit(x.subset(self.training[i]), x.subset(self.validation[i]),
                               self.p, i, ev))
        return out


def mccv_masks(x: PointPattern, p: float, k: int, seed: Seed) -> FoldMasks:
    CvScheme.mccv(p, k)
    rng = as_rng(seed)
    val = rng.random((k, len(x))) < p
    return FoldMasks(x, val, ~val, float(p))


def multinomial_masks(x: PointPattern, k: int, seed: Seed) -> FoldMasks:
    CvScheme.multinomial(k)
    rng = as_rng(seed)
    labels = rng.integers(0, k, len(x))
    val = labels[None, :] == np.arange(k)[:, None]
    return FoldMasks(x, val, ~val, 1.0 / k)


def scheme_masks(x: PointPattern, scheme: CvScheme, seed: Seed) -> FoldMasks:
    if scheme.kind == "mccv":
        return mccv_masks(x, scheme.p, scheme.k, seed)
    return multinomial_masks(x, scheme.k, seed)


def mccv_splits(x: PointPattern, p: float, k: int, seed: Seed) -> list[CvSplit]:
    """``k`` independent p-thinnings; the retained part is the validation set."""
    return mccv_masks(x, p, k, seed).splits()


def multinomial_splits(x: PointPattern, k: int, seed: Seed) -> list[CvSplit]:
    """Uniform iid fold labels; validation sets partition ``x``."""
    return multinomial_masks(x, k, seed).splits()


def sequential_multinomial_labels(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold labels built by successive thinnings with retention ``1/(k - i)``.

    Distributionally identical to iid uniform labels; kept as a test oracle.
    """
    labels = np.full(n, k - 1)
    free = np.ones(n, dtype=bool)
    for i in range(k - 1):
        take = free & (rng.random(n) < 1.0 / (k - i))
        labels[take] = i
        free &= ~take
    return labels


def nested_masks(x: PointPattern, p_e: float, scheme: CvScheme, seed: Seed) -> FoldMasks:
    """Training/validation/evaluation triples.

    Under MCCV every fold draws its own evaluation thinning; multinomial folds
    share a single evaluation set so the validation sets still partition the rest.
    """
    if not (0.0 < p_e < 1.0):
        raise ValueError("evaluation retention must lie in (0, 1)")
    rng = as_rng(seed)
    n, k = len(x), scheme.k
    if scheme.kind == "mccv":
        ev = rng.random((k, n)) < p_e
        val = ~ev & (rng.random((k, n)) < scheme.p)
    else:
        shared = rng.random(n) < p_e
        labels = rng.integers(0, k, n)
        ev = np.broadcast_to(shared, (k, n)).copy()
        val = (labels[None, :] == np.arange(k)[:, None]) & ~shared
    return FoldMasks(x, val, ~val & ~ev, scheme.p, ev)


def nested_triples(x: PointPattern, p_e: float, scheme: CvScheme, seed: Seed) -> list[CvSplit]:
    return nested_masks(x, p_e, scheme, seed).splits()
