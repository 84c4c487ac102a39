"""Experiment configuration: a small key tree read from JSON or YAML.

Recognised keys (dotted paths for nested ones)::

    dimension              int, 2..5                      (required)
    eta                    float in (0, 1)                (required)
    epsilon                float in (0, min(eta,1-eta)/10); default min(eta,1-eta)/20
    gamma                  float, default 1.0
    bump.variant           rho | chi, default rho
    bump.support_radius    float in (0, pi), default 1.0
    center                 list of n floats, default the origin
    truncation             Lambda_max, >= 2 * lambda_grid.max (required)
    truncation_factor      optional; per-lambda Lambda_max = factor * lambda
    lambda_grid.min/max    floats, 0 < min <= max
    lambda_grid.count      int >= 1
    lambda_grid.spacing    linear | log
    quadrature.radial_nodes   Gauss nodes per panel, default 16
    quadrature.grading_power  optional, default 1/max(eta, 0.25)
    quadrature.tolerance      default 1e-8
    coefficients           fourier | model (table used by r1-lower), default fourier
    mode                   mollified | indicator, default mollified
    x_points               list of points, default [center]
    shift_floor            eigenvalue floor for the positivity shift, default 0
    reliability            trusted fraction of Lambda_max, default 0.5
    max_basis              default 12000
    r2_max_points          default 2500
    heat.c, heat.times     Gaussian constant (default 1/8), list of t values
    thresholds             map report name -> max ratio
    cache_dir              eigendata cache directory (else WEYLLAB_CACHE_DIR)
    output.format          csv | json
    output.path            output file or directory
    seed, fixture          bookkeeping ids
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .mollifier import default_epsilon
from .potential import BumpProfile, QuadratureSettings, RadialSingularPotential

DEFAULTS = {
    "epsilon": None,
    "gamma": 1.0,
    "bump": {"variant": "rho", "support_radius": 1.0},
    "center": None,
    "truncation_factor": None,
    "lambda_grid": {"min": 4.0, "max": 8.0, "count": 5, "spacing": "log"},
    "quadrature": {"radial_nodes": 16, "grading_power": None, "tolerance": 1e-8},
    "coefficients": "fourier",
    "mode": "mollified",
    "x_points": None,
    "shift_floor": 0.0,
    "reliability": 0.5,
    "max_basis": 12000,
    "r2_max_points": 2500,
    "heat": {"c": 0.125, "times": None},
    "thresholds": {},
    "cache_dir": None,
    "output": {"format": "csv", "path": None},
    "seed": 0,
    "fixture": None,
}
REQUIRED = ("dimension", "eta", "truncation")
FREE_MAPS = ("thresholds",)


class ConfigError(ValueError):
    def __init__(self, message: str, rule: str | None = None, line: int | None = None):
        super().__init__(message)
        self.rule = rule
        self.line = line


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        key = f"{path}{k}"
        if k not in base and key not in REQUIRED:
            raise ConfigError(f"unknown key '{key}'", rule="known keys only")
        if isinstance(base.get(k), dict) and k not in FREE_MAPS:
            if not isinstance(v, dict):
                raise ConfigError(f"'{key}' must be a mapping", rule="structure")
            out[k] = _merge(base[k], v, f"{key}.")
        else:
            out[k] = v
    return out


@dataclass
class ExperimentConfig:
    raw: dict
    dimension: int
    eta: float
    epsilon: float
    gamma: float
    bump: BumpProfile
    center: tuple
    truncation: float
    truncation_factor: float | None
    lambdas: np.ndarray
    quadrature: QuadratureSettings
    coefficients: str
    mode: str
    x_points: list
    shift_floor: float
    reliability: float
    max_basis: int
    r2_max_points: int
    heat_c: float
    heat_times: list | None
    thresholds: dict
    cache_dir: str | None
    output_format: str
    output_path: str | None
    seed: int
    fixture: str | None
    source: str | None = field(default=None)

    def potential(self) -> RadialSingularPotential:
        return RadialSingularPotential(self.dimension, self.eta, self.gamma, self.bump, self.center)

    def cutoff_for(self, lam: float) -> float:
        if self.truncation_factor:
            return self.truncation_factor * lam
        return self.truncation


def _rule(ok: bool, message: str, rule: str):
    if not ok:
        raise ConfigError(f"{message} (rule: {rule})", rule=rule)


def validate(raw: dict, source: str | None = None) -> ExperimentConfig:
    for k in REQUIRED:
        if k not in raw:
            raise ConfigError(f"missing required key '{k}'", rule="required keys")
    d = _merge(DEFAULTS, raw)
    try:
        n = int(d["dimension"])
        eta = float(d["eta"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric value: {exc}", rule="numeric types") from exc
    _rule(n in (2, 3, 4, 5), f"dimension={n}", "dimension in 2..5")
    _rule(0 < eta < 1, f"eta={eta}", "eta in (0,1)")
    eps = default_epsilon(eta) if d["epsilon"] is None else float(d["epsilon"])
    _rule(0 < eps < min(eta, 1 - eta) / 10, f"epsilon={eps}", "epsilon in (0, min(eta,1-eta)/10)")
    b = d["bump"]
    _rule(b["variant"] in ("rho", "chi"), f"bump.variant={b['variant']}", "bump.variant in {rho, chi}")
    a = float(b["support_radius"])
    _rule(0 < a < math.pi, f"bump.support_radius={a}", "support_radius in (0, pi)")
    g = d["lambda_grid"]
    lo, hi, cnt = float(g["min"]), float(g["max"]), int(g["count"])
    _rule(0 < lo <= hi, f"lambda_grid min={lo} max={hi}", "0 < lambda_grid.min <= lambda_grid.max")
    _rule(cnt >= 1, f"lambda_grid.count={cnt}", "lambda_grid.count >= 1")
    _rule(g["spacing"] in ("linear", "log"), f"spacing={g['spacing']}", "spacing in {linear, log}")
    if cnt == 1:
        lams = np.array([lo])
    elif g["spacing"] == "log":
        lams = np.geomspace(lo, hi, cnt)
    else:
        lams = np.linspace(lo, hi, cnt)
    trunc = float(d["truncation"])
    factor = d["truncation_factor"]
    if factor is None:
        _rule(trunc >= 2 * hi, f"truncation={trunc} < 2*lambda_grid.max={2 * hi}",
              "truncation Lambda_max >= 2*lambda_grid.max")
    else:
        factor = float(factor)
        _rule(factor >= 2, f"truncation_factor={factor}", "truncation Lambda_max >= 2*lambda_grid.max")
    q = d["quadrature"]
    quad = QuadratureSettings(order=int(q["radial_nodes"]),
                              grading_power=None if q["grading_power"] is None else float(q["grading_power"]),
                              tolerance=float(q["tolerance"]))
    center = tuple(float(c) for c in (d["center"] or [0.0] * n))
    _rule(len(center) == n, f"center has {len(center)} coordinates", "center has n coordinates")
    xs = d["x_points"] or [list(center)]
    for x in xs:
        _rule(len(x) == n, f"x point {x}", "x_points have n coordinates")
    _rule(d["coefficients"] in ("fourier", "model"), f"coefficients={d['coefficients']}", "coefficients in {fourier, model}")
    _rule(d["mode"] in ("mollified", "indicator"), f"mode={d['mode']}", "mode in {mollified, indicator}")
    _rule(0 < float(d["reliability"]) <= 1, "reliability", "reliability in (0,1]")
    o = d["output"]
    _rule(o["format"] in ("csv", "json"), f"output.format={o['format']}", "output.format in {csv, json}")
    gamma = float(d["gamma"])
    return ExperimentConfig(
        raw=d, dimension=n, eta=eta, epsilon=eps, gamma=gamma,
        bump=BumpProfile(a, b["variant"]), center=center, truncation=trunc,
        truncation_factor=factor, lambdas=lams, quadrature=quad,
        coefficients=d["coefficients"], mode=d["mode"],
        x_points=[[float(c) for c in x] for x in xs], shift_floor=float(d["shift_floor"]),
        reliability=float(d["reliability"]), max_basis=int(d["max_basis"]),
        r2_max_points=int(d["r2_max_points"]), heat_c=float(d["heat"]["c"]),
        heat_times=d["heat"]["times"], thresholds=dict(d["thresholds"]),
        cache_dir=d["cache_dir"], output_format=o["format"], output_path=o["path"],
        seed=int(d["seed"]), fixture=d["fixture"], source=source)


def parse_text(text: str, fmt: str, source: str = "<string>") -> dict:
    try:
        if fmt == "json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: {exc.msg}", rule="parse", line=exc.lineno) from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"{source}:{line}: {getattr(exc, 'problem', exc)}", rule="parse", line=line) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping", rule="parse")
    return data


def _set_dotted(data: dict, key: str, value) -> None:
    parts = key.split(".")
    node = data
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set '{key}': '{p}' is not a mapping", rule="structure")
    node[parts[-1]] = value


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key=value`` strings; values are parsed as YAML scalars or lists."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not key=value", rule="override syntax")
        key, text = item.split("=", 1)
        _set_dotted(data, key.strip(), yaml.safe_load(text))
    return data


def load_config(path, overrides=None) -> ExperimentConfig:
    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "yaml"
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}", rule="file exists") from exc
    data = apply_overrides(parse_text(text, fmt, str(path)), overrides)
    return validate(data, str(path))


def from_dict(data: dict, overrides=None) -> ExperimentConfig:
    return validate(apply_overrides(data, overrides))
