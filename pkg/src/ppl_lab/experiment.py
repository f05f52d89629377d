"""Declarative Monte-Carlo studies: model configs, replicate runner and metric aggregation."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bandwidth import (select_bandwidth_cvl, select_bandwidth_poisson_lik_cv,
                        select_bandwidth_ppl)
from .constant import fit_constant_intensity
from .cv import CvScheme, scheme_masks
from .fields import LinearField, field_from_config
from .geometry import UNIT_SQUARE, PointPattern, QuadratureGrid, Window
from .hardcore import HardCoreFolds, fit_hardcore, fit_hardcore_pseudolikelihood
from .innovations import CoordPower, f_from_name
from .learning import LOSS_KINDS
from .metrics import scalar_metrics, surface_metrics
from .simulate import (DppSpec, GaussianFieldSpec, HardCoreSpec, derive_seed, simulate_dpp,
                       simulate_hardcore, simulate_lgcp, simulate_poisson, thin_independent)

STUDIES = ("constant", "hardcore", "bandwidth")


class ConfigError(ValueError):
    """Invalid experiment or model configuration."""


# -- models ------------------------------------------------------------------

class Model:
    name: str

    def __init__(self, cfg: dict, window: Window):
        self.cfg = dict(cfg)
        self.window = window

    def simulate(self, seed: int) -> PointPattern:
        raise NotImplementedError

    def truth_surface(self, grid: QuadratureGrid) -> Optional[np.ndarray]:
        return None

    def mean_intensity(self) -> Optional[float]:
        """Intensity when the model is homogeneous, else ``None``."""
        return None

    def true_params(self) -> dict:
        return {}


def _field(cfg, key: str, required: bool = True):
    if key not in cfg:
        if required:
            raise ConfigError(f"model parameter {key!r} missing")
        return None
    try:
        return field_from_config(cfg[key])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _positive(cfg: dict, key: str) -> float:
    try:
        v = float(cfg[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"model parameter {key!r} missing or not a number") from exc
    if not v > 0:
        raise ConfigError(f"model parameter {key!r} must be positive")
    return v


def _is_constant(f) -> bool:
    return isinstance(f, LinearField) and f.b == 0 and f.c == 0


class PoissonModel(Model):
    name = "poisson"

    def __init__(self, cfg, window):
        super().__init__(cfg, window)
        self.rho = _field(cfg, "intensity")
        if self.rho.min_on(window) < 0:
            raise ConfigError("Poisson intensity must be non-negative")

    def simulate(self, seed):
        if _is_constant(self.rho):
            return simulate_poisson(self.rho.a, self.window, seed)
        return simulate_poisson(self.rho, self.window, seed, bound=1.01 * self.rho.max_on(self.window))

    def truth_surface(self, grid):
        return self.rho(grid.cell_centers)

    def mean_intensity(self):
        return self.rho.a if _is_constant(self.rho) else None


class LgcpModel(Model):
    name = "lgcp"

    def __init__(self, cfg, window):
        super().__init__(cfg, window)
        mean = _field(cfg, "mean")
        self.mean = mean.a if _is_constant(mean) else mean
        self.variance = _positive(cfg, "variance")
        self.decay = _positive(cfg, "decay")
        self.spec = GaussianFieldSpec(self.mean, self.variance, self.decay, int(cfg.get("grid", 64)))

    def simulate(self, seed):
        return simulate_lgcp(self.spec, self.window, seed)

    def truth_surface(self, grid):
        return np.exp(self.spec.mean_on(grid.cell_centers) + self.variance / 2)

    def mean_intensity(self):
        return None if callable(self.mean) else math.exp(self.mean + self.variance / 2)


class DppModel(Model):
    name = "dpp"

    def __init__(self, cfg, window):
        super().__init__(cfg, window)
        self.variance = _positive(cfg, "variance")
        self.decay = _positive(cfg, "decay")
        trunc = cfg.get("truncation")
        self.spec = DppSpec(self.variance, self.decay, None if trunc is None else int(trunc))
        self.retention = _field(cfg, "thinning", required=False)
        if self.retention is not None and (self.retention.min_on(window) < 0
                                           or self.retention.max_on(window) > 1):
            raise ConfigError("DPP thinning retention must lie in [0, 1]")

    def simulate(self, seed):
        x = simulate_dpp(self.spec, self.window, seed)
        if self.retention is None:
            return x
        return thin_independent(x, self.retention, derive_seed(seed, 1))[0]

    def truth_surface(self, grid):
        base = np.full(len(grid.cell_centers), self.variance)
        return base if self.retention is None else base * self.retention(grid.cell_centers)

    def mean_intensity(self):
        if self.retention is None:
            return self.variance
        return self.variance * self.retention.a if _is_constant(self.retention) else None


class HardCoreModel(Model):
    name = "hardcore"

    def __init__(self, cfg, window):
        super().__init__(cfg, window)
        self.spec = HardCoreSpec(_positive(cfg, "beta"), _positive(cfg, "R"),
                                 int(cfg.get("burn_in", 100_000)))

    def simulate(self, seed):
        return simulate_hardcore(self.spec, self.window, seed)

    def true_params(self):
        return {"beta": self.spec.beta, "R": self.spec.R}


MODELS = {m.name: m for m in (PoissonModel, LgcpModel, DppModel, HardCoreModel)}


def build_model(cfg: dict, window: Window = UNIT_SQUARE) -> Model:
    if not isinstance(cfg, dict) or cfg.get("name") not in MODELS:
        raise ConfigError(f"model must be one of {sorted(MODELS)}")
    try:
        return MODELS[cfg["name"]](cfg, window)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


# -- spec --------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    study: str
    model: dict
    replicates: int
    seed: int = 0
    cv: list = field(default_factory=list)
    losses: list = field(default_factory=lambda: ["L2"])
    gammas: list = field(default_factory=lambda: [0.0])
    f: list = field(default_factory=lambda: ["inverse"])
    selectors: list = field(default_factory=lambda: ["ppl", "cvl"])
    grid_resolution: int = 128
    window: dict = field(default_factory=lambda: UNIT_SQUARE.to_dict())
    name: str = "experiment"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        if not isinstance(d, dict):
            raise ConfigError("experiment spec must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown spec keys: {sorted(unknown)}")
        for key in ("study", "model", "replicates"):
            if key not in d:
                raise ConfigError(f"spec key {key!r} missing")
        spec = cls(**d)
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def validate(self) -> None:
        if self.study not in STUDIES:
            raise ConfigError(f"study must be one of {STUDIES}")
        if not isinstance(self.replicates, int) or self.replicates < 1:
            raise ConfigError("replicates must be a positive integer")
        if not isinstance(self.grid_resolution, int) or self.grid_resolution < 1:
            raise ConfigError("grid_resolution must be a positive integer")
        try:
            w = Window.from_dict(self.window)
            self.schemes()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid window or CV scheme: {exc}") from exc
        model = build_model(self.model, w)
        for loss in self.losses:
            if loss not in LOSS_KINDS:
                raise ConfigError(f"loss must be one of {LOSS_KINDS}")
        for name in self.f:
            try:
                f_from_name(name)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.study == "constant":
            if model.mean_intensity() is None:
                raise ConfigError("constant-intensity study needs a homogeneous model")
            if not self.cv:
                raise ConfigError("constant-intensity study needs at least one CV scheme")
            for g in self.gammas:
                try:
                    CoordPower(float(g)).check_window(w)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"gamma {g!r}: {exc}") from exc
        if self.study == "hardcore" and not self.cv:
            raise ConfigError("hard-core study needs at least one CV scheme")
        if self.study == "bandwidth":
            if model.truth_surface(QuadratureGrid(w, 1)) is None:
                raise ConfigError("bandwidth study needs a model with a known intensity")
            for s in self.selectors:
                if s not in ("ppl", "cvl", "poisson_lik_cv"):
                    raise ConfigError(f"unknown selector {s!r}")
                if s != "cvl" and not self.cv:
                    raise ConfigError(f"selector {s!r} needs at least one CV scheme")

    def schemes(self) -> list[CvScheme]:
        return [CvScheme.from_dict(c) for c in self.cv]

    def configs(self) -> list[dict]:
        """Factorial configuration list in a fixed order."""
        out = []
        schemes = list(enumerate(self.schemes()))
        if self.study == "constant":
            for ci, s in schemes:
                for g in self.gammas:
                    out.append({"selector": "ppl", "cv_index": ci, "scheme": s,
                                "test_fn": f"gamma={float(g):g}", "gamma": float(g)})
        elif self.study == "hardcore":
            for ci, s in schemes:
                for loss in self.losses:
                    for f in self.f:
                        out.append({"selector": "ppl", "cv_index": ci, "scheme": s,
                                    "loss": loss, "test_fn": f})
            out.append({"selector": "pseudolikelihood"})
        else:
            for sel in self.selectors:
                if sel == "cvl":
                    out.append({"selector": "cvl", "test_fn": "inverse"})
                elif sel == "poisson_lik_cv":
                    for ci, s in schemes:
                        out.append({"selector": sel, "cv_index": ci, "scheme": s})
                else:
                    for ci, s in schemes:
                        for loss in self.losses:
                            for f in self.f:
                                out.append({"selector": "ppl", "cv_index": ci, "scheme": s,
                                            "loss": loss, "test_fn": f})
        return out


# -- running -------------------------------------------------------------------

def _base_row(model: str, cfg: dict, replicate, seed) -> dict:
    s: Optional[CvScheme] = cfg.get("scheme")
    return {"model": model, "selector": cfg.get("selector"), "loss": cfg.get("loss"),
            "cv": s.kind if s else None, "p": s.p if s else None, "k": s.k if s else None,
            "test_fn": cfg.get("test_fn"), "replicate": replicate, "seed": seed}


def replicate_seed(master: int, replicate: int) -> int:
    return derive_seed(master, replicate)


def cv_seed(pattern_seed: int, cv_index: int) -> int:
    return derive_seed(pattern_seed, 1000 + cv_index)


def run_replicate(spec_dict: dict, r: int):
    """All configurations on one simulated pattern; returns ``(rows, surfaces)``."""
    spec = ExperimentSpec.from_dict(spec_dict)
    w = Window.from_dict(spec.window)
    model = build_model(spec.model, w)
    grid = QuadratureGrid(w, spec.grid_resolution)
    seed = replicate_seed(spec.seed, r)
    rows, surfaces = [], {}
    try:
        x = model.simulate(seed)
    except Exception as exc:  # recorded, run continues
        row = _base_row(model.name, {}, r, seed)
        row.update(row_type="error", name=f"simulation failed: {exc}")
        return [(-1, row)], surfaces

    masks_cache: dict = {}
    hc_cache: dict = {}

    def masks_for(cfg):
        ci = cfg["cv_index"]
        if ci not in masks_cache:
            masks_cache[ci] = scheme_masks(x, cfg["scheme"], cv_seed(seed, ci))
        return masks_cache[ci]

    for idx, cfg in enumerate(spec.configs()):
        base = _base_row(model.name, cfg, r, seed)
        try:
            values = _run_config(spec, cfg, x, grid, masks_for, hc_cache, surfaces, idx)
        except Exception as exc:
            rows.append((idx, dict(base, row_type="error", name=str(exc) or type(exc).__name__)))
            continue
        for name, value in values:
            rows.append((idx, dict(base, row_type="estimate", name=name, value=value)))
    return rows, surfaces


def _run_config(spec, cfg, x, grid, masks_for, hc_cache, surfaces, idx):
    sel = cfg["selector"]
    if spec.study == "constant":
        res = fit_constant_intensity(x, cfg["scheme"], CoordPower(cfg["gamma"]),
                                     grid=grid, masks=masks_for(cfg))
        return [("theta_1", res.theta_1), ("theta_23", res.theta_23),
                ("h_weighted", res.h_weighted), ("classical", res.classical)]
    if spec.study == "hardcore":
        if sel == "pseudolikelihood":
            b, R = fit_hardcore_pseudolikelihood(x, grid)
            return [("beta", b), ("R", R), ("n_points", len(x))]
        ci = cfg["cv_index"]
        if ci not in hc_cache:
            hc_cache[ci] = HardCoreFolds(x, masks_for(cfg), grid)
        fit = fit_hardcore(x, cfg["scheme"], f_from_name(cfg["test_fn"]), cfg["loss"],
                           grid=grid, folds=hc_cache[ci])
        return [("beta", fit.beta), ("R", fit.R), ("sup_R", fit.sup_R)]
    if sel == "cvl":
        fit = select_bandwidth_cvl(x)
    elif sel == "poisson_lik_cv":
        fit = select_bandwidth_poisson_lik_cv(x, cfg["scheme"], masks=masks_for(cfg))
    else:
        fit = select_bandwidth_ppl(x, cfg["scheme"], f_from_name(cfg["test_fn"]), cfg["loss"],
                                   grid=grid, masks=masks_for(cfg))
    surfaces[idx] = fit.surface(x, grid)
    return [("bandwidth", fit.theta)]


def _metric_rows(spec: ExperimentSpec, model: Model, grid: QuadratureGrid,
                 estimates: dict, surfaces: dict) -> list[dict]:
    out = []
    for idx, cfg in enumerate(spec.configs()):
        base = _base_row(model.name, cfg, None, None)
        if spec.study == "bandwidth":
            surf = surfaces.get(idx, [])
            if len(surf) < 1:
                continue
            m = surface_metrics(surf, model.truth_surface(grid), grid)
            for name, v in m.as_dict().items():
                out.append(dict(base, row_type="metric", name=name, value=v))
            continue
        if spec.study == "constant":
            truths = {"theta_1": model.mean_intensity(), "theta_23": model.mean_intensity(),
                      "h_weighted": model.mean_intensity(), "classical": model.mean_intensity()}
        else:
            truths = model.true_params()
        for est, truth in truths.items():
            vals = estimates.get((idx, est), [])
            if len(vals) < 2:
                continue
            m = scalar_metrics(vals, truth)
            out += [dict(base, row_type="metric", name=f"{est}.abs_bias", value=m.abs_bias, se=m.bias_se),
                    dict(base, row_type="metric", name=f"{est}.variance", value=m.variance),
                    dict(base, row_type="metric", name=f"{est}.mse", value=m.mse, se=m.mse_se)]
    return out


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list[dict]:
    """Run every replicate and return rows in a deterministic order."""
    spec.validate()
    w = Window.from_dict(spec.window)
    model = build_model(spec.model, w)
    grid = QuadratureGrid(w, spec.grid_resolution)
    payload = spec.to_dict()
    reps = range(spec.replicates)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_replicate, [payload] * spec.replicates, reps))
    else:
        results = [run_replicate(payload, r) for r in reps]

    meta = [{"row_type": "meta", "model": model.name, "name": k, "value": v}
            for k, v in (("master_seed", spec.seed), ("replicates", spec.replicates),
                         ("grid_resolution", spec.grid_resolution))]
    keyed, estimates, surfaces = [], {}, {}
    for r, (rows, surf) in enumerate(results):
        for seq, (idx, row) in enumerate(rows):
            keyed.append(((idx, r, seq), row))
            if row["row_type"] == "estimate":
                estimates.setdefault((idx, row["name"]), []).append(row["value"])
        for idx, s in surf.items():
            surfaces.setdefault(idx, []).append(s)
    keyed.sort(key=lambda t: t[0])
    return meta + [row for _, row in keyed] + _metric_rows(spec, model, grid, estimates, surfaces)
