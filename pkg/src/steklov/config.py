"""Run configuration: one JSON document, unknown keys rejected."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from . import curves
from .conformal import PolynomialConformalMap, certify, rfe_map
from .errors import ConfigError

PRESETS = ("circle", "ellipse", "kite", "rfe", "disk")
SOLVERS = ("bie", "disk", "both")


@dataclass
class GridSpec:
    box: tuple | None = None
    resolution: int = 128


@dataclass
class AnalysisSpec:
    delta: list = field(default_factory=lambda: [0.1])
    m: list | None = None  # default m0+2..m0+8
    N: int = 0
    K: float = 2.0
    m_center: int = 0
    sigma_max: float | None = None


@dataclass
class ApproximateSpec:
    target: str = "mobius"
    a: float = 0.8
    N: list = field(default_factory=lambda: [5, 10, 20])
    order: int = 400


@dataclass
class RunConfig:
    domain: dict = field(default_factory=lambda: {"preset": "circle"})
    solver: str = "bie"
    n_nodes: int = 256
    N_tr: int | None = None
    n_keep: int | None = None
    sigma_target: float = 30.0
    alpha: float = 0.8
    j: int = 1
    point: tuple | None = None
    n_list: list | None = None
    expect: dict | None = None  # {"j": sigma} labels to reconcile against
    grid: GridSpec = field(default_factory=GridSpec)
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    approximate: ApproximateSpec = field(default_factory=ApproximateSpec)
    output: str = "out"


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kw = {}
    for k, v in data.items():
        sub = {"grid": GridSpec, "analysis": AnalysisSpec, "approximate": ApproximateSpec}.get(k) if cls is RunConfig else None
        kw[k] = _build(sub, v, f"{where}.{k}") if sub else v
    try:
        return cls(**kw)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _complex_list(v, where):
    """Numbers or ``[re, im]`` pairs."""
    try:
        return np.array([complex(a) if np.isscalar(a) else complex(a[0], a[1]) for a in v], dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{where}: expected numbers or [re, im] pairs") from exc


def validate(cfg: RunConfig) -> RunConfig:
    d = cfg.domain
    if not isinstance(d, dict):
        raise ConfigError("domain: expected an object")
    kinds = [k for k in ("preset", "curve", "map") if k in d]
    if len(kinds) != 1:
        raise ConfigError("domain: exactly one of 'preset', 'curve', 'map' is required")
    allowed = {"preset": {"preset", "params"}, "curve": {"curve"}, "map": {"map"}}[kinds[0]]
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"domain: unknown key(s) {', '.join(extra)}")
    if "preset" in d and d["preset"] not in PRESETS:
        raise ConfigError(f"domain.preset must be one of {', '.join(PRESETS)}")
    if cfg.solver not in SOLVERS:
        raise ConfigError(f"solver must be one of {', '.join(SOLVERS)}")
    if cfg.solver in ("disk", "both") and not is_map_domain(cfg):
        raise ConfigError("solver 'disk' requires a band-limited map domain (preset rfe/disk or 'map')")
    if cfg.n_nodes % 2 or cfg.n_nodes < 16:
        raise ConfigError("n_nodes must be even and at least 16")
    if not 0 <= abs(cfg.alpha) <= 1:
        raise ConfigError("|alpha| must not exceed 1")
    if cfg.grid.resolution < 16:
        raise ConfigError("grid.resolution must be at least 16")
    if cfg.grid.box is not None and len(cfg.grid.box) != 4:
        raise ConfigError("grid.box must be [xmin, xmax, ymin, ymax]")
    if cfg.point is not None and len(cfg.point) != 2:
        raise ConfigError("point must be [x1, x2]")
    if cfg.expect is not None:
        try:
            cfg.expect = {int(k): float(v) for k, v in dict(cfg.expect).items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError("expect must map eigen indices to numbers") from exc
    if any(not 0 < dl < 1 for dl in cfg.analysis.delta):
        raise ConfigError("analysis.delta entries must lie in (0, 1)")
    if cfg.analysis.N not in (0, 1, 2):
        raise ConfigError("analysis.N must be 0, 1 or 2")
    if cfg.approximate.target != "mobius":
        raise ConfigError("approximate.target must be 'mobius'")
    return cfg


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return validate(_build(RunConfig, data, "config"))


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def is_map_domain(cfg: RunConfig) -> bool:
    return "map" in cfg.domain or cfg.domain.get("preset") in ("rfe", "disk")


def build_map(cfg: RunConfig) -> PolynomialConformalMap:
    d = cfg.domain
    if d.get("preset") == "rfe":
        p = d.get("params", {}) or {}
        if not isinstance(p, dict) or set(p) - {"a", "N"}:
            raise ConfigError("rfe params: object with optional keys a, N")
        return rfe_map(p.get("a", 0.8), p.get("N", 20))
    if d.get("preset") == "disk":
        return certify(PolynomialConformalMap([1.0], 0.0))
    if "map" in d:
        m = d["map"]
        if not isinstance(m, dict) or set(m) - {"p_coeffs", "f0"} or "p_coeffs" not in m:
            raise ConfigError("domain.map: object with keys p_coeffs and optional f0")
        f0 = m.get("f0", [0.0, 0.0])
        return certify(PolynomialConformalMap(_complex_list(m["p_coeffs"], "domain.map.p_coeffs"), complex(*f0)))
    raise ConfigError("domain is not a map domain")


def build_curve(cfg: RunConfig) -> curves.AnalyticCurve:
    d = cfg.domain
    if is_map_domain(cfg):
        fmap = build_map(cfg)
        if d.get("preset") == "disk":
            return curves.circle(1.0)
        return fmap.boundary_curve()
    if "curve" in d:
        c = d["curve"]
        if not isinstance(c, dict) or set(c) != {"coeffs_x", "coeffs_y"}:
            raise ConfigError("domain.curve: object with keys coeffs_x, coeffs_y")
        try:
            return curves.check_curve(
                curves.AnalyticCurve.from_coeffs(
                    _complex_list(c["coeffs_x"], "coeffs_x"), _complex_list(c["coeffs_y"], "coeffs_y")
                )
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    name = d["preset"]
    params = d.get("params", []) or []
    try:
        if name == "circle":
            return curves.circle(*params)
        if name == "ellipse":
            return curves.ellipse(*(params or [2.0, 1.0]))
        return curves.kite()
    except TypeError as exc:
        raise ConfigError(f"bad params for preset {name}: {exc}") from exc
