"""Pattern CSV + window sidecar IO and the long-format results CSV."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .geometry import PointPattern, Window

SCHEMA_LINE = "# ppl-lab schema v1"
RESULT_COLUMNS = ("row_type", "model", "selector", "loss", "cv", "p", "k", "test_fn",
                  "replicate", "seed", "name", "value", "se")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".window.json")


def write_window(path, w: Window) -> None:
    Path(path).write_text(json.dumps(w.to_dict(), sort_keys=True) + "\n")


def read_window(path) -> Window:
    return Window.from_dict(json.loads(Path(path).read_text()))


def write_pattern(path, x: PointPattern, sidecar: bool = True) -> None:
    path = Path(path)
    lines = ["x,y"] + ["%.17g,%.17g" % (a, b) for a, b in x.xy]
    path.write_text("\n".join(lines) + "\n")
    if sidecar:
        write_window(sidecar_path(path), x.window)


def read_pattern(path, window: Optional[Window] = None) -> PointPattern:
    """Read ``x,y`` CSV; the window comes from ``window``, else the JSON sidecar."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or [c.strip().lower() for c in rows[0][:2]] != ["x", "y"]:
        raise ValueError(f"{path}: expected a header 'x,y'")
    try:
        xy = np.array([[float(r[0]), float(r[1])] for r in rows[1:]], dtype=float).reshape(-1, 2)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed coordinate row") from exc
    if window is None:
        side = sidecar_path(path)
        if not side.exists():
            raise ValueError(f"{path}: no window supplied and no sidecar {side.name}")
        window = read_window(side)
    return PointPattern(xy, window)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def write_results(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in RESULT_COLUMNS])


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path}: missing schema line")
        return list(csv.DictReader(fh))
