"""Shared helpers for the study scripts: argument parsing, running and table printing."""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from ppl_lab.experiment import ExperimentSpec, run_experiment
from ppl_lab.io import write_results

ROOT = Path(__file__).resolve().parents[1]


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--replicates", type=int, help="override the replicate count")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--grid-resolution", type=int, dest="grid_resolution")
    p.add_argument("--out-dir", default=str(ROOT / "results"))
    return p


def run(config: str, args, **overrides) -> list[dict]:
    d = json.loads((ROOT / "configs" / config).read_text())
    for key in ("replicates", "seed", "grid_resolution"):
        if getattr(args, key) is not None:
            d[key] = getattr(args, key)
    d.update(overrides)
    spec = ExperimentSpec.from_dict(d)
    rows = run_experiment(spec, threads=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_results(out / f"{spec.name}.csv", rows)
    errors = [r for r in rows if r["row_type"] == "error"]
    if errors:
        print(f"{spec.name}: {len(errors)} error rows, first: {errors[0]['name']}")
    return rows


def metrics(rows: list[dict]) -> list[dict]:
    return [r for r in rows if r["row_type"] == "metric"]
