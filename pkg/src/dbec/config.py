"""Run configuration as a flat, sectioned key-value document (INI).

Example::

    [grid]
    n = 64
    L = 12

    [coupling]
    lambda1 = -1
    lambda2 = 0

    [solver]
    mass = 1

    [sweep]
    masses = 0.5, 1, 2, 4

Vectors are comma separated; a scalar grid entry applies to all three
axes.  Files ending in ``.json`` may give the same sections as a JSON
object instead.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .functionals import CouplingPair, format_float
from .grid import Grid
from .groundstate import SolverConfig


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


_SOLVER_KEYS = {
    f.name: f.type
    for f in fields(SolverConfig)
    if f.name not in ("mass", "coupling", "grid", "init", "widths", "epsilon", "seed")
}
_BOOL_KEYS = {"polish", "control_run"}
_INT_KEYS = {"max_iter", "newton_max_iter"}

SCHEMA = {
    "grid": {"n", "L", "dipole_cutoff"},
    "coupling": {"lambda1", "lambda2"},
    "solver": {"mass"} | set(_SOLVER_KEYS),
    "init": {"tag", "widths", "epsilon", "seed"},
    "sweep": {"masses", "margin"},
}


@dataclass(frozen=True)
class RunConfig:
    solver: SolverConfig
    masses: tuple = ()
    margin: float = 1e-3


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"expected numbers, got {text!r}") from exc


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _scalar(text, name):
    vals = _floats(text)
    if len(vals) != 1:
        raise ConfigError(f"{name}: expected one number, got {text!r}")
    return vals[0]


def _axes(vals, name):
    if len(vals) == 1:
        return vals * 3
    if len(vals) != 3:
        raise ConfigError(f"{name}: expected 1 or 3 entries")
    return vals


def read_sections(path):
    """Load a config file into ``{section: {key: text}}``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return {s: {k: _json_text(v) for k, v in items.items()} for s, items in raw.items()}
    return parse_sections(text)


def _json_text(v):
    if isinstance(v, (list, tuple)):
        return ", ".join(str(x) for x in v)
    if v is None:
        return ""
    return str(v).lower() if isinstance(v, bool) else str(v)


def parse_sections(text):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (L vs l)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return {s: dict(cp[s]) for s in cp.sections()}


def build(sections):
    """Validate sections and build a :class:`RunConfig`."""
    for sec, items in sections.items():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = set(items) - SCHEMA[sec]
        if unknown:
            raise ConfigError(f"[{sec}]: unknown keys {sorted(unknown)}")
    g = sections.get("grid", {})
    if "n" not in g or "L" not in g:
        raise ConfigError("[grid] needs n and L")
    cutoff = g.get("dipole_cutoff", "").strip()
    try:
        grid = Grid(
            n=_axes(_ints(g["n"]), "n"),
            L=_axes(_floats(g["L"]), "L"),
            dipole_cutoff=_scalar(cutoff, "dipole_cutoff") if cutoff and cutoff.lower() != "none" else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    c = sections.get("coupling", {})
    try:
        coupling = CouplingPair(_scalar(c["lambda1"], "lambda1"), _scalar(c["lambda2"], "lambda2"))
    except KeyError as exc:
        raise ConfigError(f"[coupling] needs {exc.args[0]}") from exc
    s = sections.get("solver", {})
    sweep = sections.get("sweep", {})
    masses = _floats(sweep.get("masses", ""))
    if "mass" in s:
        mass = _scalar(s["mass"], "mass")
    elif masses:
        mass = masses[0]
    else:
        raise ConfigError("[solver] needs mass (or [sweep] masses)")
    kw = {}
    for key, text in s.items():
        if key == "mass":
            continue
        if key in _BOOL_KEYS:
            kw[key] = _bool(text)
        elif key in _INT_KEYS:
            kw[key] = _ints(text)[0]
        else:
            kw[key] = _scalar(text, key)
    init = sections.get("init", {})
    if "tag" in init:
        kw["init"] = init["tag"].strip()
    if init.get("widths", "").strip():
        kw["widths"] = _axes(_floats(init["widths"]), "widths")
    if "epsilon" in init:
        kw["epsilon"] = _scalar(init["epsilon"], "epsilon")
    if "seed" in init:
        kw["seed"] = _ints(init["seed"])[0]
    try:
        solver = SolverConfig(mass=mass, coupling=coupling, grid=grid, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    margin = _scalar(sweep["margin"], "margin") if "margin" in sweep else 1e-3
    return RunConfig(solver, masses, margin)


def load(path, overrides=None):
    """Read a config file and apply ``{(section, key): text}`` overrides."""
    sections = read_sections(path) if path is not None else {}
    for (sec, key), value in (overrides or {}).items():
        if value is not None:
            sections.setdefault(sec, {})[key] = value
    return build(sections)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    if v is None:
        return "none"
    return format_float(v)


def to_sections(rc):
    """Inverse of :func:`build` (fully explicit, every default written out)."""
    s = rc.solver
    solver = {"mass": _fmt(s.mass)}
    for key in _SOLVER_KEYS:
        solver[key] = _fmt(getattr(s, key))
    init = {"tag": s.init, "widths": _fmt(s.widths), "epsilon": _fmt(s.epsilon), "seed": _fmt(s.seed)}
    out = {
        "grid": {"n": _fmt(s.grid.n), "L": _fmt(s.grid.L), "dipole_cutoff": _fmt(s.grid.dipole_cutoff)},
        "coupling": {"lambda1": _fmt(s.coupling.lambda1), "lambda2": _fmt(s.coupling.lambda2)},
        "solver": solver,
        "init": init,
    }
    if rc.masses:
        out["sweep"] = {"masses": _fmt(rc.masses), "margin": _fmt(rc.margin)}
    return out


def dumps(rc):
    lines = []
    for sec, items in to_sections(rc).items():
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {v}" for k, v in items.items())
        lines.append("")
    return "\n".join(lines)


def with_mass(rc, mass):
    return replace(rc, solver=replace(rc.solver, mass=mass))
