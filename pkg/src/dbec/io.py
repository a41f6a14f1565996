"""Run-directory artifacts: JSON echoes, CSV series, raw field dumps, manifest.

Every float written here uses 17 significant digits, so values round-trip
exactly and reruns of a deterministic computation give identical bytes.

Field files are a 48-byte little-endian header -- ``n1, n2, n3`` as int64
and ``L1, L2, L3`` as float64 -- followed by the complex samples as
interleaved little-endian float64 pairs in row-major (C) order.
"""

from __future__ import annotations

import json
import math
import os
import platform
from pathlib import Path

import numpy as np

from .functionals import format_float
from .grid import Grid

ENV_OUTPUT_ROOT = "DBEC_OUTPUT_ROOT"
MANIFEST_NAME = "manifest.json"
_HEADER = np.dtype([("n", "<i8", (3,)), ("L", "<f8", (3,))])


def default_output_root():
    return Path(os.environ.get(ENV_OUTPUT_ROOT, "runs"))


def _encode(o, indent, level):
    if isinstance(o, dict):
        if not o:
            return "{}"
        if indent is None:
            return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v, None, 0)}" for k, v in o.items()) + "}"
        pad = "\n" + " " * (indent * (level + 1))
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in o.items()]
        return "{" + ",".join(items) + "\n" + " " * (indent * level) + "}"
    if isinstance(o, (list, tuple)):
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in o) + "]"
    if isinstance(o, (bool, np.bool_)):
        return "true" if o else "false"
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, (float, np.floating)):
        # JSON has no NaN/inf; null keeps the document standard.
        return format_float(o) if math.isfinite(o) else "null"
    if isinstance(o, Path):
        return json.dumps(str(o))
    return json.dumps(o)


def dumps(obj, indent=2):
    """JSON text with 17-significant-digit floats."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_float(v)


def write_csv(path, header, rows, comments=()):
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    """Return ``(comments, header, rows)`` with cells parsed to numbers/bools."""
    comments, header, rows = [], None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([_parse_cell(c) for c in line.split(",")])
    return comments, header, rows


def _parse_cell(c):
    if c in ("true", "false"):
        return c == "true"
    try:
        return int(c)
    except ValueError:
        return float(c)


HISTORY_HEADER = ("iteration", "E", "Q", "residual", "mass")
GAMMA_HEADER = ("c", "gamma", "beta", "anisotropy", "converged")


def write_history(path, history):
    write_csv(path, HISTORY_HEADER, history)


def write_gamma_curve(path, curve):
    lo, hi = curve.c_star_bracket()
    comments = [f"threshold={format_float(curve.threshold)}", f"margin={format_float(curve.margin)}"]
    rows = [[r[k] for k in GAMMA_HEADER] for r in curve.rows]
    write_csv(path, GAMMA_HEADER, rows, comments)
    return lo, hi


def write_field(path, grid, u):
    u = np.ascontiguousarray(np.asarray(u, dtype="<c16").reshape(grid.shape))
    header = np.zeros((), dtype=_HEADER)
    header["n"] = grid.n
    header["L"] = grid.L
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(u.tobytes(order="C"))


def read_field(path):
    """Return ``(grid, u)`` from a field file."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.itemsize:
        raise ValueError(f"{path}: truncated header")
    header = np.frombuffer(raw[: _HEADER.itemsize], dtype=_HEADER)[0]
    grid = Grid(n=tuple(int(v) for v in header["n"]), L=tuple(float(v) for v in header["L"]))
    body = raw[_HEADER.itemsize :]
    if len(body) != 16 * grid.size:
        raise ValueError(f"{path}: expected {grid.size} complex samples, found {len(body) / 16:g}")
    return grid, np.frombuffer(body, dtype="<c16").reshape(grid.shape).astype(complex)


def write_manifest(run_dir, command, config, grid, seed, outputs, wall_clock, version):
    manifest = {
        "command": command,
        "version": version,
        "config": config,
        "grid": {
            **grid.to_dict(),
            "spacing": list(grid.spacing),
            "points": grid.size,
        },
        "seed": seed,
        "wall_clock_seconds": wall_clock,
        "outputs": sorted(outputs),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    write_json(Path(run_dir) / MANIFEST_NAME, manifest)
    return manifest
