"""Scenario configuration: schema, YAML loading, environment overrides."""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Any

import yaml

from .channel import ChannelParams
from .topology import LayoutParams

ENV_PREFIX = "FEMTOCOOP_"
POLICIES = ("closed", "open", "cooperative", "noncooperative")
POLICY_ALIASES = {"coop": "cooperative", "noncoop": "noncooperative"}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path, ``line`` 1-based when known."""

    def __init__(self, key: str, message: str, line: int | None = None):
        self.key, self.line = key, line
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{key}: {message}")


@dataclass(frozen=True)
class CooperationParams:
    d2d_range: float = 100.0
    # None: D2D at full power
    d2d_snr_target_db: float | None = None
    cochannel_only: bool = False
    max_coalition_size: int = 4
    # leading discovery entries combined into multi-MUE join offers
    group_candidates: int = 4
    half_duplex: bool = True
    relay_service: str = "slice"
    lease_objective: str = "nash"
    max_sweeps: int | None = None


@dataclass(frozen=True)
class LeaseGrid:
    alpha_step: float = 0.05
    beta_step: float = 0.01
    power_points: int = 64


@dataclass(frozen=True)
class ScenarioConfig:
    N: int
    M: int
    L_n: int = 1
    r: float = 20.0
    delta: float = 0.5
    D: int = 4
    lambda_m: float = 150e3
    lambda_l: float = 150e3
    gamma_m_db: float = 10.0
    gamma_l_db: float = 15.0
    p_max_dbm: float = 20.0
    rounds: int = 100
    seed: int = 0
    access_policy: str = "cooperative"
    n_subchannels: int = 500
    macro_radius: float = 1000.0
    sensing_factor: float = 2.0
    arrival_mode: str = "expected_transmissions"
    path_loss_compensation: bool = False
    compensation_target_dbm: float = -80.0
    # [x, y, radius] in metres; null = whole macrocell
    cluster: tuple | None = None
    name: str = "scenario"
    channel: ChannelParams = field(default_factory=ChannelParams)
    cooperation: CooperationParams = field(default_factory=CooperationParams)
    lease: LeaseGrid = field(default_factory=LeaseGrid)
    axes: dict = field(default_factory=dict)

    @property
    def p_max(self) -> float:
        return 10.0 ** ((self.p_max_dbm - 30.0) / 10.0)

    @property
    def gamma_m(self) -> float:
        return 10.0 ** (self.gamma_m_db / 10.0)

    @property
    def gamma_l(self) -> float:
        return 10.0 ** (self.gamma_l_db / 10.0)

    def layout(self) -> LayoutParams:
        return LayoutParams(
            n_faps=self.N,
            n_mues=self.M,
            fues_per_fap=self.L_n,
            femto_radius=self.r,
            macro_radius=self.macro_radius,
            n_subchannels=self.n_subchannels,
            sensing_factor=self.sensing_factor,
            lambda_m=self.lambda_m,
            lambda_l=self.lambda_l,
            p_max=self.p_max,
            cluster=self.cluster,
        )

    def with_overrides(self, **values) -> "ScenarioConfig":
        """Copy with dotted-key overrides, e.g. ``{"cooperation.d2d_range": 50}``."""
        data = to_dict(self)
        for key, value in values.items():
            _set_path(data, key.split("."), value)
        return from_dict(data)


REQUIRED = ("N", "M")
_SECTIONS = {"channel": ChannelParams, "cooperation": CooperationParams, "lease": LeaseGrid}
_CHOICES = {
    "access_policy": POLICIES,
    "arrival_mode": ("literal", "expected_transmissions"),
    "channel.fading_mode": ("closed_form", "monte_carlo"),
    "cooperation.relay_service": ("slice", "fue_rate"),
    "cooperation.lease_objective": ("fue", "nash"),
}
_AXIS_KEYS = ("N", "M", "r", "delta", "L_n", "mue_x")


def to_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if dataclasses.is_dataclass(v):
            v = {g.name: _plain(getattr(v, g.name)) for g in dataclasses.fields(v)}
        out[f.name] = _plain(v)
    return out


def _plain(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _set_path(data: dict, path: list[str], value):
    node = data
    for p in path[:-1]:
        node = node.setdefault(p, {})
    node[path[-1]] = value


def _coerce(key: str, value: Any, default: Any, annotation: str, line: int | None):
    """Check and convert a scalar against the default's type."""
    optional = "None" in annotation
    if value is None:
        if optional:
            return None
        raise ConfigError(key, "must not be null", line)
    if isinstance(default, bool) or annotation == "bool":
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}", line)
        return value
    if isinstance(default, int) or annotation.startswith("int"):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}", line)
        return int(value)
    if isinstance(default, float) or annotation.startswith("float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}", line)
        return float(value)
    if isinstance(default, tuple) or annotation.startswith("tuple"):
        size = 3 if default is None else len(default)
        if not isinstance(value, (list, tuple)) or len(value) != size or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
            raise ConfigError(key, f"expected a list of {size} numbers", line)
        return tuple(float(x) for x in value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}", line)
        return value
    return value


def from_dict(data: dict, lines: dict[str, int] | None = None) -> ScenarioConfig:
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(key, "required key is missing")
    kwargs: dict[str, Any] = {}
    top = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    for key, value in data.items():
        if key not in top:
            raise ConfigError(key, "unknown key", lines.get(key))
        if key in _SECTIONS:
            kwargs[key] = _section(key, value, _SECTIONS[key], lines)
        elif key == "axes":
            kwargs[key] = _axes(value, lines)
        else:
            f = top[key]
            default = f.default if f.default is not dataclasses.MISSING else 0
            kwargs[key] = _coerce(key, value, default, str(f.type), lines.get(key))
    if isinstance(kwargs.get("access_policy"), str):
        kwargs["access_policy"] = POLICY_ALIASES.get(kwargs["access_policy"], kwargs["access_policy"])
    try:
        cfg = ScenarioConfig(**kwargs)
    except ValueError as exc:
        key = str(exc).split(":", 1)[0]
        raise ConfigError(f"channel.{key}", str(exc).split(":", 1)[-1].strip(), lines.get(f"channel.{key}")) from None
    _validate(cfg, lines)
    return cfg


def _section(name, value, cls, lines):
    if value is None:
        return cls()
    if not isinstance(value, dict):
        raise ConfigError(name, "expected a mapping", lines.get(name))
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, v in value.items():
        path = f"{name}.{key}"
        if key not in fields:
            raise ConfigError(path, "unknown key", lines.get(path))
        f = fields[key]
        kwargs[key] = _coerce(path, v, f.default, str(f.type), lines.get(path))
    try:
        return cls(**kwargs)
    except ValueError as exc:
        key, _, msg = str(exc).partition(":")
        path = f"{name}.{key.strip()}"
        raise ConfigError(path, msg.strip() or str(exc), lines.get(path)) from None


def _axes(value, lines):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError("axes", "expected a mapping of axis name to value list", lines.get("axes"))
    out = {}
    for k, v in value.items():
        path = f"axes.{k}"
        if k not in _AXIS_KEYS:
            raise ConfigError(path, f"unknown axis (choose from {', '.join(_AXIS_KEYS)})", lines.get(path))
        if not isinstance(v, list) or not v:
            raise ConfigError(path, "expected a non-empty list", lines.get(path))
        out[k] = list(v)
    return out


def _validate(cfg: ScenarioConfig, lines):
    def bad(key, msg):
        raise ConfigError(key, msg, lines.get(key))

    if cfg.N < 0:
        bad("N", "must be >= 0")
    if cfg.M < 0:
        bad("M", "must be >= 0")
    if cfg.L_n < 1:
        bad("L_n", "must be >= 1")
    if not 0.2 < cfg.r:
        bad("r", "must exceed the 0.2 m forbidden radius")
    if not 0.0 < cfg.delta < 1.0:
        bad("delta", "must lie in (0, 1)")
    if cfg.D < 1:
        bad("D", "must be >= 1")
    if cfg.lambda_m <= 0:
        bad("lambda_m", "must be positive")
    if cfg.lambda_l <= 0:
        bad("lambda_l", "must be positive")
    if cfg.rounds < 1:
        bad("rounds", "must be >= 1")
    if cfg.cluster is not None:
        cx, cy, cr = cfg.cluster
        if cr <= 0 or math.hypot(cx, cy) - cr < 50.0 or math.hypot(cx, cy) + cr > cfg.macro_radius:
            bad("cluster", "disc must have positive radius and lie between 50 m from the MBS and the cell edge")
    if cfg.n_subchannels < cfg.M:
        bad("n_subchannels", "must be >= M (MUE subchannels are orthogonal)")
    for key, choices in _CHOICES.items():
        obj = cfg
        for part in key.split("."):
            obj = getattr(obj, part)
        if obj not in choices:
            bad(key, f"must be one of {', '.join(choices)}")
    co = cfg.cooperation
    if co.d2d_range <= 0:
        bad("cooperation.d2d_range", "must be positive")
    if co.max_coalition_size < 2:
        bad("cooperation.max_coalition_size", "must be >= 2")
    if co.group_candidates < 0:
        bad("cooperation.group_candidates", "must be >= 0")
    if co.max_sweeps is not None and co.max_sweeps < 1:
        bad("cooperation.max_sweeps", "must be >= 1")
    g = cfg.lease
    for key in ("alpha_step", "beta_step"):
        step = getattr(g, key)
        if not 0 < step <= 1:
            bad(f"lease.{key}", "must lie in (0, 1]")
    if g.power_points < 1:
        bad("lease.power_points", "must be >= 1")


def _line_map(text: str) -> dict[str, int]:
    """Dotted key -> 1-based line of that key in the YAML source."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    out: dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = f"{prefix}{k.value}"
                out[key] = k.start_mark.line + 1
                walk(v, key + ".")

    walk(root, "")
    return out


def parse_env(environ: dict[str, str] | None = None) -> dict[str, Any]:
    """FEMTOCOOP_COOPERATION__D2D_RANGE=50 -> {"cooperation.d2d_range": 50}."""
    environ = os.environ if environ is None else environ
    top = {f.name.lower(): f.name for f in dataclasses.fields(ScenarioConfig)}
    out = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX) :].lower().split("__")
        parts[0] = top.get(parts[0], parts[0])
        out[".".join(parts)] = yaml.safe_load(raw)
    return out


def load_config(path, environ: dict[str, str] | None = None) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("<syntax>", str(getattr(exc, "problem", exc)), mark.line + 1 if mark else None) from None
    data = {} if data is None else data
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    for key, value in parse_env(environ).items():
        _set_path(data, key.split("."), value)
    return from_dict(data, _line_map(text))
