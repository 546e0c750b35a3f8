"""
Experiment configuration.

A configuration is a YAML mapping. Command-line flags override values from
the file, and values from the file override the defaults below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .. import geometry as geo
from ..sampler import (DEFAULT_CYLINDER_CAP, AtomicDirections, FixedDirection, ModelSpec,
                       UniformDirections)

MODES = ("simulate", "analytic", "clt-scan", "variance-scan", "diffop-test", "atomic-example")
ANALYTIC_QUERIES = ("mean_volume", "variance_volume_exact", "t_window", "v_volume",
                    "v_surface", "cov_volume_surface", "chord_power_integral")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    spec: ModelSpec
    window: object
    r_values: tuple = (1.0,)
    realizations: int = 100
    probes: int = 10_000
    eps: float | None = None
    surface: bool = False
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    cap: float = DEFAULT_CYLINDER_CAP
    quad_tol: float = 1e-8
    analytic_var: bool = True
    queries: tuple = ANALYTIC_QUERIES
    atomic: dict = field(default_factory=dict)
    diffop: dict = field(default_factory=dict)
    plot: str | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        r = list(self.r_values)
        if not r or any(not (v > 0 and math.isfinite(v)) for v in r):
            raise ConfigError("r_values must be a nonempty list of positive numbers")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigError("r_values must be strictly increasing")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.probes < 1:
            raise ConfigError("probes must be >= 1")
        if self.eps is not None and not self.eps > 0:
            raise ConfigError("eps must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.format not in ("csv", "jsonlines"):
            raise ConfigError("format must be csv or jsonlines")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        bad = [q for q in self.queries if q not in ANALYTIC_QUERIES]
        if bad:
            raise ConfigError(f"unknown analytic queries: {bad}")

    @property
    def surface_eps(self) -> float | None:
        """Dilation radius for surface estimates, or None when not estimated."""
        if self.eps is not None:
            return self.eps
        if not self.surface:
            return None
        return 0.01 * min(1.0, geo.law_reach(self.spec.base) or 1.0)


def _num(d: dict, key: str, default=None, kind=float):
    v = d.get(key, default)
    if v is None:
        return None
    try:
        return kind(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected a number, got {v!r}") from exc


def parse_shape(desc: dict):
    if not isinstance(desc, dict) or "type" not in desc:
        raise ConfigError("base must be a mapping with a 'type'")
    t = desc["type"]
    try:
        if t == "ball":
            return geo.Ball(_num(desc, "radius", 1.0))
        if t == "box":
            hw = desc.get("half_widths")
            if hw is None:
                raise ConfigError("box base needs half_widths")
            return geo.Box(tuple(float(v) for v in hw))
        if t == "interval":
            if "length" in desc:
                ell = _num(desc, "length")
                return geo.Interval(ell / 2.0, ell / 2.0)
            return geo.Interval(_num(desc, "a"), _num(desc, "b"))
        if t == "point":
            return geo.Point()
    except geo.GeometryError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown base type {t!r}")


def parse_radius_law(desc):
    if desc is None:
        return None
    t = desc.get("type")
    try:
        if t == "constant":
            return geo.ConstantRadius(_num(desc, "value", 1.0))
        if t == "uniform":
            return geo.UniformRadius(_num(desc, "lo"), _num(desc, "hi"))
    except geo.GeometryError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown radius law {t!r}")


def parse_frame(desc, n: int, m: int) -> geo.Frame:
    try:
        if "axes" in desc:
            return geo.Frame.from_axes(n, m, desc["axes"])
        if "matrix" in desc:
            return geo.Frame(np.asarray(desc["matrix"], dtype=float), m)
        if "angle" in desc and n == 2:
            a = float(desc["angle"])
            c, s = math.cos(a), math.sin(a)
            return geo.Frame(np.array([[c, -s], [s, c]]), m)
    except (geo.GeometryError, ValueError) as exc:
        raise ConfigError(f"invalid frame: {exc}") from exc
    raise ConfigError("a frame needs 'axes', 'matrix', or (n = 2) 'angle'")


def parse_direction(desc, n: int, m: int):
    if desc is None:
        return UniformDirections()
    if isinstance(desc, str):
        desc = {"type": desc}
    t = desc.get("type")
    if t == "uniform":
        return UniformDirections()
    if t == "fixed":
        return FixedDirection(parse_frame(desc.get("frame", {"axes": list(range(n))}), n, m))
    if t == "atoms":
        frames = tuple(parse_frame(f, n, m) for f in desc.get("frames", []))
        weights = desc.get("weights")
        if weights is None:
            weights = [1.0 / len(frames)] * len(frames) if frames else []
        try:
            return AtomicDirections(frames, tuple(float(w) for w in weights))
        except geo.GeometryError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown direction law {t!r}")


def parse_window(desc):
    if desc is None:
        return geo.BallWindow(1.0)
    t = desc.get("type")
    try:
        if t == "ball":
            return geo.BallWindow(_num(desc, "radius", 1.0))
        if t == "cube":
            return geo.CubeWindow(_num(desc, "side", 1.0))
    except geo.GeometryError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown window type {t!r}")


def parse_model(desc) -> ModelSpec:
    if not isinstance(desc, dict):
        raise ConfigError("model must be a mapping")
    for key in ("n", "m", "gamma", "base"):
        if key not in desc:
            raise ConfigError(f"model.{key} is required")
    n, m = _num(desc, "n", kind=int), _num(desc, "m", kind=int)
    shape = parse_shape(desc["base"])
    rl = parse_radius_law(desc.get("radius_law"))
    base = geo.FixedBase(shape) if rl is None else geo.DilatedBase(shape, rl)
    direction = parse_direction(desc.get("direction"), n, m)
    try:
        return ModelSpec(n, m, _num(desc, "gamma"), direction, base)
    except geo.GeometryError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Build a configuration; ``overrides`` (from the command line) win."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    data = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    if "mode" not in data:
        raise ConfigError("mode is required")
    spec = parse_model(data.get("model"))
    r_values = data.get("r_values", [data.get("r", 1.0)])
    if not isinstance(r_values, (list, tuple)):
        r_values = [r_values]
    try:
        return ExperimentConfig(
            mode=data["mode"], spec=spec, window=parse_window(data.get("window")),
            r_values=tuple(float(v) for v in r_values),
            realizations=_num(data, "realizations", 100, int),
            probes=_num(data, "probes", 10_000, int),
            eps=_num(data, "eps"), surface=bool(data.get("surface", False)),
            seed=_num(data, "seed", data.get("master_seed", 0), int), out=data.get("out"),
            format=data.get("format", "csv"), workers=_num(data, "workers", 1, int),
            cap=_num(data, "cap", DEFAULT_CYLINDER_CAP),
            quad_tol=_num(data, "quad_tol", 1e-8),
            analytic_var=bool(data.get("analytic_var", True)),
            queries=tuple(data.get("queries", ANALYTIC_QUERIES)),
            atomic=dict(data.get("atomic") or {}), diffop=dict(data.get("diffop") or {}),
            plot=data.get("plot"), raw=raw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read a YAML configuration file. Raises OSError if it cannot be read."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw if raw is not None else {}, overrides)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)
