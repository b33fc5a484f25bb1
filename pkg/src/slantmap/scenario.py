"""Scenario files: a small INI-like text format describing a map and a run.

Example::

    [params]
    t = 0.7

    [manifold K]
    dim = 4
    metric = identity
    J.1.3 = "cos(t)"

    [manifold L]
    dim = 4

    [map]
    source = K
    target = L
    side = domain-slant
    F.1 = "exp(x1)*cos(x3)"
    lambda = "exp(x1)"
    theta = "t"

    [sample]
    box = -1, 1
    points = 64
    seed = 42

    [checks]
    v = 0
    tol.lemma3.1 = 1e-8

Expression values are double-quoted.  A parameter may itself be a quoted
expression in the coordinates; it is substituted wherever it appears.
"""
from __future__ import annotations

import hashlib
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np
from scipy.stats import qmc

from .exprlang import ExprError, ExprSyntaxError, ScalarExpr, parse
from .geometry import ChartManifold
from .maps import SmoothMap

SIDES = ("domain-slant", "range-slant")
BUILTINS = ("ex3_1", "ex4_1")


class ScenarioError(ValueError):
    """Invalid scenario text; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, line: int = 0, column: int | None = None):
        where = f"line {line}" if line else "scenario"
        if line and column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass
class _Value:
    raw: str
    line: int
    column: int       # 1-based column of the value's first byte
    quoted: bool

    @property
    def text(self) -> str:
        return self.raw[1:-1] if self.quoted else self.raw


@dataclass
class Scenario:
    name: str
    digest: str
    text: str
    params: dict
    manifolds: dict
    source: str
    target: str
    map: SmoothMap
    side: str
    box_lo: np.ndarray
    box_hi: np.ndarray
    n_points: int = 64
    seed: int = 42
    explicit_points: list = field(default_factory=list)
    declared_lambda: ScalarExpr | None = None
    declared_theta: ScalarExpr | None = None
    v: float | None = None
    tolerances: dict = field(default_factory=dict)
    only: list | None = None
    probe_pairs: int = 16
    allow_full_rank: bool = False

    @property
    def m(self) -> int:
        return self.map.m

    @property
    def n(self) -> int:
        return self.map.n

    def points(self) -> list[np.ndarray]:
        """Explicit points if given, else scrambled Sobol points in the box."""
        if self.explicit_points:
            return [np.array(p, dtype=float) for p in self.explicit_points]
        sampler = qmc.Sobol(d=self.m, scramble=True, seed=self.seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # non power-of-two counts
            u = sampler.random(self.n_points)
        pts = qmc.scale(u, self.box_lo, self.box_hi)
        return [np.array(p) for p in pts]


_SECTION = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([A-Za-z_][A-Za-z0-9_]*))?\s*\]$")
_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_.\-]*)\s*=\s*(.*)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_KEYS = {
    "params": None,
    "manifold": {"dim", "metric"},
    "map": {"source", "target", "side", "lambda", "theta"},
    "sample": {"box", "points", "seed", "point"},
    "checks": {"v", "only", "probe_pairs", "allow_full_rank"},
}
_PREFIXED = {"manifold": ("g", "J"), "map": ("F",), "sample": ("box",), "checks": ("tol",)}


def _split_lines(text: str):
    """Yield ``(section, section_arg, key, value)`` records."""
    section, arg = None, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _SECTION.match(stripped)
        if m:
            section, arg = m.group(1), m.group(2)
            if section not in _KEYS:
                raise ScenarioError(f"unknown section [{section}]", lineno)
            if (section == "manifold") != (arg is not None):
                raise ScenarioError(f"section [{stripped[1:-1]}] is malformed", lineno)
            yield lineno, section, arg, None, None
            continue
        m = _KEY.match(stripped)
        if not m:
            raise ScenarioError("expected 'key = value'", lineno)
        if section is None:
            raise ScenarioError("key outside of any section", lineno)
        key, raw = m.group(1), m.group(2).strip()
        if raw.startswith('"'):
            close = raw.find('"', 1)
            if close > 0 and raw[close + 1:].strip().startswith("#"):
                raw = raw[:close + 1]
        elif "#" in raw:
            raw = raw.split("#", 1)[0].strip()
        quoted = len(raw) >= 2 and raw[0] == '"' and raw[-1] == '"'
        if raw.startswith('"') and not quoted:
            raise ScenarioError("unterminated quoted value", lineno)
        indent = len(line) - len(line.lstrip())
        col_chars = indent + m.start(2) + 1
        column = len(line[:col_chars - 1].encode("utf-8")) + 1
        yield lineno, section, arg, key, _Value(raw, lineno, column, quoted)


def _check_key(section: str, key: str, line: int):
    allowed = _KEYS[section]
    if allowed is None:
        if not _NAME.match(key):
            raise ScenarioError(f"invalid parameter name {key!r}", line)
        return
    if key in allowed:
        return
    prefix = key.split(".", 1)[0]
    if "." in key and prefix in _PREFIXED.get(section, ()):
        return
    raise ScenarioError(f"unknown key {key!r} in [{section}]", line)


def _indices(key: str, count: int, line: int) -> tuple[int, ...]:
    parts = key.split(".")[1:]
    if len(parts) != count or not all(p.isdigit() for p in parts):
        raise ScenarioError(f"key {key!r} needs {count} numeric index(es)", line)
    return tuple(int(p) for p in parts)


def _number(v: _Value, kind=float):
    if v.quoted:
        raise ScenarioError("expected a number, got a quoted value", v.line, v.column)
    try:
        return kind(v.raw)
    except ValueError:
        raise ScenarioError(f"expected {'an integer' if kind is int else 'a number'}, got {v.raw!r}",
                            v.line, v.column) from None


def _numbers(v: _Value) -> list[float]:
    if v.quoted:
        raise ScenarioError("expected comma-separated numbers", v.line, v.column)
    try:
        return [float(x) for x in v.raw.split(",")]
    except ValueError:
        raise ScenarioError(f"expected comma-separated numbers, got {v.raw!r}", v.line, v.column) from None


def _expr_text(v: _Value) -> str:
    if not v.quoted:
        raise ScenarioError("expression values must be double-quoted", v.line, v.column)
    return v.text


def _bool(v: _Value) -> bool:
    if v.raw in ("true", "yes", "1"):
        return True
    if v.raw in ("false", "no", "0"):
        return False
    raise ScenarioError(f"expected true or false, got {v.raw!r}", v.line, v.column)


class _ParamTable:
    """Parameters as numbers or coordinate expressions, resolved per chart dimension."""

    def __init__(self):
        self.values: dict[str, object] = {}
        self.where: dict[str, _Value] = {}

    def set(self, name: str, value, where: _Value | None):
        self.values[name] = value
        if where is not None:
            self.where[name] = where

    def numeric(self) -> dict:
        return {k: v for k, v in self.values.items() if not isinstance(v, str)}

    def for_dim(self, dim: int) -> dict:
        out = self.numeric()
        for k, v in self.values.items():
            if isinstance(v, str):
                w = self.where.get(k)
                try:
                    out[k] = parse(v, dim, self.numeric())
                except ExprError as exc:
                    _raise_expr(exc, w, f"parameter {k!r}")
        return out


def _raise_expr(exc: ExprError, where: _Value | None, what: str):
    if where is None:
        raise ScenarioError(f"{what}: {exc}") from None
    col = where.column + 1 + getattr(exc, "offset", 0) if isinstance(exc, ExprSyntaxError) else None
    raise ScenarioError(f"{what}: {exc}", where.line, col) from None


def _parse_expr(v: _Value, dim: int, params: dict, what: str) -> ScalarExpr:
    try:
        return parse(_expr_text(v), dim, params)
    except ExprError as exc:
        _raise_expr(exc, v, what)


def parse_scenario(data: bytes | str, name: str = "scenario",
                   overrides: Mapping[str, object] | None = None) -> Scenario:
    """Parse scenario text.

    ``overrides`` replaces parameter values (numbers or expression strings)
    before any expression is parsed.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioError(f"scenario is not valid UTF-8 ({exc.reason} at byte {exc.start})") from None
    else:
        text = data
    params = _ParamTable()
    manifolds_raw: dict[str, dict] = {}
    map_raw: dict[str, _Value] = {}
    comps: dict[int, _Value] = {}
    sample: dict = {"box": None, "box_axes": {}, "points": [], "n": None, "seed": None}
    checks: dict = {"tol": {}}
    seen_sections = set()

    current_manifold = None
    for lineno, section, arg, key, val in _split_lines(text):
        if key is None:
            if section == "manifold":
                if arg in manifolds_raw:
                    raise ScenarioError(f"manifold {arg!r} declared twice", lineno)
                manifolds_raw[arg] = {"dim": None, "metric": None, "g": {}, "J": {}, "line": lineno}
                current_manifold = arg
            elif section in seen_sections:
                raise ScenarioError(f"section [{section}] appears twice", lineno)
            seen_sections.add(section)
            continue
        _check_key(section, key, lineno)
        if section == "params":
            if key in ("pi", "e") or re.fullmatch(r"x\d+", key):
                raise ScenarioError(f"parameter name {key!r} is reserved", lineno)
            params.set(key, val.text if val.quoted else _number(val), val)
        elif section == "manifold":
            mf = manifolds_raw[current_manifold]
            if key == "dim":
                mf["dim"] = _number(val, int)
                if mf["dim"] < 1:
                    raise ScenarioError("dim must be positive", lineno)
            elif key == "metric":
                if val.raw != "identity":
                    raise ScenarioError("metric accepts only 'identity'; give entries as g.i.j", lineno)
                mf["metric"] = "identity"
            elif key.startswith("g."):
                i, j = _indices(key, 2, lineno)
                if i > j:
                    raise ScenarioError("lower-triangle metric entry; declare i <= j", lineno)
                if (i, j) in mf["g"]:
                    raise ScenarioError(f"duplicate metric entry {key}", lineno)
                mf["g"][(i, j)] = val
            else:
                a, b = _indices(key, 2, lineno)
                mf["J"][(a, b)] = val
        elif section == "map":
            if key.startswith("F."):
                (k,) = _indices(key, 1, lineno)
                comps[k] = val
            else:
                map_raw[key] = val
        elif section == "sample":
            if key == "box":
                sample["box"] = (_numbers(val), val)
            elif key.startswith("box."):
                (i,) = _indices(key, 1, lineno)
                sample["box_axes"][i] = (_numbers(val), val)
            elif key == "points":
                sample["n"] = _number(val, int)
            elif key == "seed":
                sample["seed"] = _number(val, int)
            else:
                sample["points"].append((_numbers(val), val))
        else:
            if key.startswith("tol."):
                checks["tol"][key[4:]] = _number(val)
            elif key == "v":
                checks["v"] = _number(val)
            elif key == "only":
                checks["only"] = [s.strip() for s in val.text.split(",") if s.strip()]
            elif key == "probe_pairs":
                checks["probe_pairs"] = _number(val, int)
            else:
                checks["allow_full_rank"] = _bool(val)

    for k, v in (overrides or {}).items():
        if not _NAME.match(k):
            raise ScenarioError(f"invalid parameter name {k!r} in override")
        params.set(k, v, None)

    # manifolds
    manifolds: dict[str, ChartManifold] = {}
    for mname, mf in manifolds_raw.items():
        dim = mf["dim"]
        if dim is None:
            raise ScenarioError(f"manifold {mname!r} has no dim", mf["line"])
        if mf["metric"] and mf["g"]:
            raise ScenarioError(f"manifold {mname!r}: metric = identity conflicts with g entries", mf["line"])
        pdim = params.for_dim(dim)
        metric = None
        if mf["g"]:
            metric = {}
            for (i, j), val in mf["g"].items():
                if not (1 <= i <= dim and 1 <= j <= dim):
                    raise ScenarioError(f"metric index ({i}, {j}) exceeds dim {dim}", val.line)
                metric[(i, j)] = _parse_expr(val, dim, pdim, f"g.{i}.{j}")
            for i in range(1, dim + 1):
                if (i, i) not in metric:
                    raise ScenarioError(f"manifold {mname!r}: diagonal metric entry g.{i}.{i} missing",
                                        mf["line"])
        J = None
        if mf["J"]:
            J = {}
            for (a, b), val in mf["J"].items():
                if not (1 <= a <= dim and 1 <= b <= dim):
                    raise ScenarioError(f"J index ({a}, {b}) exceeds dim {dim}", val.line)
                J[(a, b)] = _parse_expr(val, dim, pdim, f"J.{a}.{b}")
        manifolds[mname] = ChartManifold.from_entries(dim, metric, J, name=mname)

    # map
    for req in ("source", "target"):
        if req not in map_raw:
            raise ScenarioError(f"[map] needs '{req} = <manifold name>'")
    src_name, tgt_name = map_raw["source"].raw, map_raw["target"].raw
    for nm, v in ((src_name, map_raw["source"]), (tgt_name, map_raw["target"])):
        if nm not in manifolds:
            raise ScenarioError(f"unknown manifold {nm!r}", v.line)
    src, tgt = manifolds[src_name], manifolds[tgt_name]
    side = map_raw["side"].raw if "side" in map_raw else ("domain-slant" if src.has_J else "range-slant")
    if side not in SIDES:
        raise ScenarioError(f"side must be one of {', '.join(SIDES)}", map_raw["side"].line)
    if sorted(comps) != list(range(1, tgt.dim + 1)):
        missing = sorted(set(range(1, tgt.dim + 1)) - set(comps))
        extra = sorted(set(comps) - set(range(1, tgt.dim + 1)))
        line = comps[extra[0]].line if extra else 0
        raise ScenarioError(f"dimension mismatch: map needs components F.1..F.{tgt.dim}"
                            + (f"; missing {missing}" if missing else "")
                            + (f"; unexpected {extra}" if extra else ""), line)
    pm = params.for_dim(src.dim)
    exprs = [_parse_expr(comps[k], src.dim, pm, f"F.{k}") for k in range(1, tgt.dim + 1)]
    fmap = SmoothMap(src, tgt, exprs)
    lam = _parse_expr(map_raw["lambda"], src.dim, pm, "lambda") if "lambda" in map_raw else None
    theta = _parse_expr(map_raw["theta"], src.dim, pm, "theta") if "theta" in map_raw else None

    # sample box and points
    m = src.dim
    lo, hi = np.full(m, -1.0), np.full(m, 1.0)
    if sample["box"] is not None:
        nums, val = sample["box"]
        if len(nums) != 2 or nums[0] >= nums[1]:
            raise ScenarioError("box needs 'low, high' with low < high", val.line)
        lo[:], hi[:] = nums
    for i, (nums, val) in sample["box_axes"].items():
        if not 1 <= i <= m:
            raise ScenarioError(f"box axis {i} exceeds source dim {m}", val.line)
        if len(nums) != 2 or nums[0] >= nums[1]:
            raise ScenarioError("box needs 'low, high' with low < high", val.line)
        lo[i - 1], hi[i - 1] = nums
    explicit = []
    for nums, val in sample["points"]:
        if len(nums) != m:
            raise ScenarioError(f"dimension mismatch: point has {len(nums)} coordinates, source dim is {m}",
                                val.line)
        if any(x < a or x > b for x, a, b in zip(nums, lo, hi)):
            raise ScenarioError("point lies outside the sample box", val.line)
        explicit.append(nums)
    n_points = sample["n"] if sample["n"] is not None else 64
    if n_points < 1:
        raise ScenarioError("points must be positive")

    return Scenario(
        name=name, digest=hashlib.sha256(text.encode("utf-8")).hexdigest(), text=text,
        params=dict(params.values), manifolds=manifolds, source=src_name, target=tgt_name,
        map=fmap, side=side, box_lo=lo, box_hi=hi, n_points=n_points,
        seed=sample["seed"] if sample["seed"] is not None else 42, explicit_points=explicit,
        declared_lambda=lam, declared_theta=theta, v=checks.get("v"), tolerances=checks["tol"],
        only=checks.get("only"), probe_pairs=checks.get("probe_pairs", 16),
        allow_full_rank=checks.get("allow_full_rank", False),
    )


def builtin_text(name: str) -> str:
    if name not in BUILTINS:
        raise ScenarioError(f"unknown built-in scenario {name!r}; choose from {', '.join(BUILTINS)}")
    return resources.files("slantmap").joinpath("scenarios", f"{name}.scn").read_text("utf-8")


def load_builtin(name: str, overrides: Mapping[str, object] | None = None) -> Scenario:
    return parse_scenario(builtin_text(name), name=name, overrides=overrides)


def parse_override(item: str) -> tuple[str, object]:
    """``name=value`` from the command line; non-numeric values are expressions."""
    if "=" not in item:
        raise ScenarioError(f"override {item!r} is not of the form name=value")
    k, v = (s.strip() for s in item.split("=", 1))
    try:
        return k, float(v)
    except ValueError:
        return k, v


__all__ = ["BUILTINS", "SIDES", "Scenario", "ScenarioError", "builtin_text", "load_builtin",
           "parse_override", "parse_scenario"]
