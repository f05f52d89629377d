"""Command-line entry point: ``simulate``, ``experiment`` and ``fit``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bandwidth import (select_bandwidth_cvl, select_bandwidth_poisson_lik_cv,
                        select_bandwidth_ppl)
from .constant import fit_constant_intensity
from .cv import CvScheme
from .experiment import ConfigError, ExperimentSpec, build_model, run_experiment
from .geometry import QuadratureGrid, Window
from .hardcore import fit_hardcore
from .innovations import CoordPower, f_from_name
from .io import read_pattern, write_pattern, write_results
from .learning import LOSS_KINDS
from .simulate import derive_seed

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _parse_cv(text: str) -> CvScheme:
    """``mccv:P:K`` or ``multinomial:K``."""
    parts = text.split(":")
    try:
        if parts[0] == "mccv" and len(parts) == 3:
            return CvScheme.mccv(float(parts[1]), int(parts[2]))
        if parts[0] == "multinomial" and len(parts) == 2:
            return CvScheme.multinomial(int(parts[1]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"cannot parse CV scheme {text!r}; use mccv:P:K or multinomial:K")


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    window = Window.from_dict(cfg.get("window", Window().to_dict()))
    model = build_model(cfg.get("model", {}), window)
    n = int(cfg.get("n", 1))
    if n < 1:
        raise ConfigError("n must be positive")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(n - 1)))
    for i in range(n):
        x = model.simulate(derive_seed(seed, i))
        write_pattern(out / f"pattern_{i:0{width}d}.csv", x)
    return EXIT_OK


def cmd_experiment(args) -> int:
    d = _load_json(args.config)
    if args.seed is not None:
        d["seed"] = args.seed
    if args.grid_resolution is not None:
        d["grid_resolution"] = args.grid_resolution
    spec = ExperimentSpec.from_dict(d)
    rows = run_experiment(spec, threads=max(1, args.threads))
    write_results(args.out, rows)
    return EXIT_OK


def fit_record(x, task: str, opts: dict, grid: QuadratureGrid) -> dict:
    scheme = _parse_cv(opts.get("cv", "mccv:0.5:400"))
    seed = int(opts.get("seed", 0))
    loss = opts.get("loss", "L2")
    if loss not in LOSS_KINDS:
        raise ConfigError(f"loss must be one of {LOSS_KINDS}")
    record = {"task": task, "n_points": len(x), "window": x.window.to_dict(),
              "cv": scheme.to_dict(), "seed": seed, "grid_resolution": grid.resolution}
    if task == "constant":
        res = fit_constant_intensity(x, scheme, CoordPower(float(opts.get("gamma", 0.0))),
                                     seed=seed, grid=grid)
        record.update(res.to_dict(), gamma=float(opts.get("gamma", 0.0)))
    elif task == "hardcore":
        f = f_from_name(opts.get("f", "inverse"))
        fit = fit_hardcore(x, scheme, f, loss, seed=seed, grid=grid)
        record.update(fit.to_dict(), loss=loss, f=f.name)
    elif task == "bandwidth":
        selector = opts.get("selector", "ppl")
        if selector == "ppl":
            fit = select_bandwidth_ppl(x, scheme, f_from_name(opts.get("f", "inverse")), loss,
                                       seed=seed, grid=grid)
        elif selector == "cvl":
            fit = select_bandwidth_cvl(x)
        elif selector == "poisson_lik_cv":
            fit = select_bandwidth_poisson_lik_cv(x, scheme, seed=seed, grid=grid)
        else:
            raise ConfigError(f"unknown selector {selector!r}")
        record.update(fit.to_dict())
        cvl = select_bandwidth_cvl(x)
        record["baseline_cvl_bandwidth"] = cvl.theta
    else:
        raise ConfigError(f"unknown task {task!r}")
    return record


def cmd_fit(args) -> int:
    opts = _load_json(args.config) if args.config else {}
    for key in ("cv", "loss", "f", "gamma", "selector"):
        v = getattr(args, key, None)
        if v is not None:
            opts[key] = v
    if args.seed is not None:
        opts["seed"] = args.seed
    window = Window.from_dict(_load_json(args.window)) if args.window else None
    try:
        x = read_pattern(args.pattern, window)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.pattern}: {exc}") from exc
    grid = QuadratureGrid(x.window, args.grid_resolution or 128)
    try:
        record = fit_record(x, args.task, opts, grid)
        code = EXIT_OK
    except ConfigError:
        raise
    except ValueError as exc:
        record = {"task": args.task, "error": str(exc)}
        code = EXIT_RUNTIME
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppl-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        p.add_argument("--grid-resolution", type=int, default=None, dest="grid_resolution")

    p = sub.add_parser("simulate", help="simulate patterns from a model config")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a Monte-Carlo experiment spec")
    common(p)
    p.add_argument("--out", required=True, help="results CSV path")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("fit", help="fit a single pattern")
    common(p, config_required=False)
    p.add_argument("pattern", help="pattern CSV with header x,y")
    p.add_argument("--task", required=True, choices=("constant", "hardcore", "bandwidth"))
    p.add_argument("--window", help="window JSON (default: the pattern's sidecar)")
    p.add_argument("--cv", help="mccv:P:K or multinomial:K")
    p.add_argument("--loss", choices=LOSS_KINDS)
    p.add_argument("--f", help="test-function shape: inverse or inverse_sqrt")
    p.add_argument("--gamma", type=float, help="coordinate-power exponent (constant task)")
    p.add_argument("--selector", choices=("ppl", "cvl", "poisson_lik_cv"))
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
