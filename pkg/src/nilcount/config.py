"""JSON configuration shared by every CLI command.

Sections: "group" (builtin family or explicit q/m/U), "norm" (alpha, M1, M2),
"lattice" ("identity" or L1/L2), "run" (budgets, workers, seed, tolerances).
Rational entries are strings "p/q" (or ints) and parse exactly; floats select
the approximate arithmetic path.  Schema errors name the offending field.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from fractions import Fraction

import numpy as np

from . import groups, lattices, ratlin
from .groups import GroupSpec
from .lattices import LatticeSpec
from .norms import NormParams, norm_params


class ConfigError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class RunParams:
    workers: int = 1
    seed: int = 0
    boundary_tol: float = 1e-9
    average_budget: int = 100_000
    mc_samples: int = 1_000_000


@dataclasses.dataclass(frozen=True)
class Config:
    group: GroupSpec
    norm: NormParams
    lattice: LatticeSpec
    run: RunParams


def _scalar(x, path: str):
    if isinstance(x, bool):
        raise ConfigError(f"{path}: booleans are not numbers")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"{path}: cannot parse {x!r} as a rational") from e
    raise ConfigError(f"{path}: expected a number or 'p/q' string, got {type(x).__name__}")


def _matrix(rows, path: str, n: int | None = None, m: int | None = None):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{path}: expected a list of rows")
    nr = len(rows)
    nc = len(rows[0])
    if any(len(r) != nc for r in rows):
        raise ConfigError(f"{path}: ragged rows")
    if n is not None and (nr, nc) != (n, m if m is not None else n):
        raise ConfigError(f"{path}: shape {(nr, nc)} does not match expected {(n, m or n)}")
    vals = [[_scalar(x, f"{path}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)]
    if any(isinstance(x, float) for r in vals for x in r):
        return np.array([[float(x) for x in r] for r in vals], dtype=float)
    return ratlin.mat(vals)


def _parse_group(section, path="group") -> GroupSpec:
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected an object")
    if "builtin" in section:
        name = section["builtin"]
        try:
            if name in ("heisenberg", "polarized_heisenberg"):
                return groups.builtin(name, d=section.get("d", 1))
            if name == "free_carnot":
                return groups.builtin(name, q=section.get("q", 3))
            if name == "h_type":
                U = [_matrix(u, f"{path}.U[{j}]") for j, u in enumerate(section["U"])]
                return groups.builtin(name, U=U)
        except groups.GroupValidationError as e:
            raise ConfigError(f"{path}: {e}") from e
        raise ConfigError(f"{path}.builtin: unknown family {name!r}")
    for key in ("q", "m", "U"):
        if key not in section:
            raise ConfigError(f"{path}.{key}: required for an explicit group")
    q, m = int(section["q"]), int(section["m"])
    U = [_matrix(u, f"{path}.U[{j}]", q, q) for j, u in enumerate(section["U"])]
    try:
        return groups.group_spec(q, m, U)
    except groups.GroupValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def _parse_norm(section, q: int, m: int, path="norm") -> NormParams:
    if not isinstance(section, dict) or "alpha" not in section:
        raise ConfigError(f"{path}.alpha: required")
    alpha = _scalar(section["alpha"], f"{path}.alpha")
    m1 = _matrix(section["M1"], f"{path}.M1", q, q) if "M1" in section else None
    m2 = _matrix(section["M2"], f"{path}.M2", m, m) if "M2" in section else None
    try:
        return norm_params(alpha, m1, m2, q=q, m=m)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e


def _parse_lattice(section, q: int, m: int, path="lattice") -> LatticeSpec:
    if section in (None, "identity"):
        return lattices.identity_lattice(q, m)
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected 'identity' or an object with L1/L2")
    l1 = _matrix(section["L1"], f"{path}.L1", q, q) if "L1" in section else ratlin.identity(q)
    l2 = _matrix(section["L2"], f"{path}.L2", m, m) if "L2" in section else ratlin.identity(m)
    try:
        return lattices.lattice_spec(l1, l2)
    except lattices.LatticeValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def parse_config(source) -> Config:
    """Parse a path, JSON text, or dict into a validated Config."""
    if isinstance(source, dict):
        raw = source
    else:
        text = source
        if not str(source).lstrip().startswith("{"):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e}") from e
    if "group" not in raw:
        raise ConfigError("group: section required")
    if "norm" not in raw:
        raise ConfigError("norm: section required")
    g = _parse_group(raw["group"])
    p = _parse_norm(raw["norm"], g.q, g.m)
    lat = _parse_lattice(raw.get("lattice"), g.q, g.m)
    run_raw = raw.get("run", {})
    if not isinstance(run_raw, dict):
        raise ConfigError("run: expected an object")
    known = {f.name for f in dataclasses.fields(RunParams)}
    unknown = set(run_raw) - known
    if unknown:
        raise ConfigError(f"run: unknown keys {sorted(unknown)}")
    return Config(group=g, norm=p, lattice=lat, run=RunParams(**run_raw))


def _ser_scalar(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def _ser_matrix(mat):
    if isinstance(mat, np.ndarray):
        return [[float(x) for x in row] for row in mat]
    return [[_ser_scalar(x) for x in row] for row in mat]


def serialize_config(cfg: Config) -> dict:
    return {
        "group": {"q": cfg.group.q, "m": cfg.group.m,
                  "U": [_ser_matrix(u) for u in cfg.group.U]},
        "norm": {"alpha": _ser_scalar(cfg.norm.alpha),
                 "M1": _ser_matrix(cfg.norm.M1), "M2": _ser_matrix(cfg.norm.M2)},
        "lattice": {"L1": _ser_matrix(cfg.lattice.L1), "L2": _ser_matrix(cfg.lattice.L2)},
        "run": dataclasses.asdict(cfg.run),
    }


def config_hash(cfg: Config) -> str:
    blob = json.dumps(serialize_config(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
