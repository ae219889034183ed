"""Run configuration: strict parsing of the JSON config files the CLI takes.

Every key is validated before any computation starts; unknown keys are
rejected rather than ignored so a typo cannot silently fall back to a
default.  All failures raise ConfigError with the offending key in the
message.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .cones import Cone, ConeField
from .errors import ConfigError, MapValidationError
from .semiconjugacy import StripMap, make_strip_map
from .torus_map import TorusMap, map_from_dict

_TOL_DEFAULTS = {
    "tangency": 0.05,
    "closure": 1e-5,
    "invariance": 1e-3,
    "solver": 1e-10,
    "center": 1e-10,
    "direction": 1e-3,
}
_TRACE_DEFAULTS = {"step": 1e-3, "max_len": 20.0}
_GROWTH_DEFAULTS = {"segment": None, "cell": 0.01, "K": None, "c": 1.0}
_SOLVER_DEFAULTS = {"shape": (65, 512), "max_iters": 10000}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _check_keys(data: dict, allowed, label: str) -> None:
    unknown = set(data) - set(allowed)
    _require(not unknown, f"unknown keys in {label}: {sorted(unknown)}")


def _merged(data, defaults: dict, label: str) -> dict:
    if data is None:
        return dict(defaults)
    _require(isinstance(data, dict), f"{label} must be an object")
    _check_keys(data, defaults, label)
    out = dict(defaults)
    out.update(data)
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters; build_* methods construct the heavy objects."""

    map_spec: dict | None
    cone_spec: dict | None
    strip_spec: dict | None
    allow_degree_one: bool
    grid_n: int
    depth: int
    tolerances: dict
    seeds: int
    period_max: int
    n_max: int
    trace: dict
    growth: dict
    solver: dict
    output_dir: str
    rng_seed: int
    extras: dict = field(default_factory=dict)

    def build_map(self) -> TorusMap:
        _require(self.map_spec is not None, "config defines no map")
        try:
            return map_from_dict(self.map_spec,
                                 allow_degree_one=self.allow_degree_one)
        except MapValidationError as exc:
            raise ConfigError(f"invalid map: {exc}") from exc

    def build_cones(self) -> ConeField:
        _require(self.cone_spec is not None, "map definition has no cone block")
        spec = self.cone_spec
        try:
            if "axis" in spec:
                _check_keys(spec, ("axis", "half_width"), "cone")
                _require("half_width" in spec, "cone needs half_width")
                return ConeField.constant(Cone(float(spec["axis"]),
                                               float(spec["half_width"])))
            _check_keys(spec, ("axes", "half_widths"), "cone")
            _require("axes" in spec and "half_widths" in spec,
                     "cone grid needs axes and half_widths")
            return ConeField.from_grid(spec["axes"], spec["half_widths"])
        except MapValidationError as exc:
            raise ConfigError(f"invalid cone: {exc}") from exc

    def build_strip(self) -> StripMap:
        _require(self.strip_spec is not None, "config defines no strip block")
        spec = self.strip_spec
        _check_keys(spec, ("ell", "fx_terms", "fy_terms"), "strip")
        _require("ell" in spec, "strip needs ell")
        try:
            return make_strip_map(spec["ell"], spec.get("fx_terms", ()),
                                  spec.get("fy_terms", ()))
        except MapValidationError as exc:
            raise ConfigError(f"invalid strip: {exc}") from exc


_TOP_KEYS = ("map", "map_file", "strip", "grid_n", "depth", "tolerances",
             "seeds", "period_max", "n_max", "trace", "growth", "solver",
             "output_dir", "rng_seed")


def parse_config(data: dict, base_dir: str = ".") -> RunConfig:
    _require(isinstance(data, dict), "config must be a JSON object")
    _check_keys(data, _TOP_KEYS, "config")
    _require(not ("map" in data and "map_file" in data),
             "give either map or map_file, not both")

    map_data = data.get("map")
    if "map_file" in data:
        path = os.path.join(base_dir, data["map_file"])
        try:
            with open(path) as fh:
                map_data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read map_file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"map_file {path} is not valid JSON: {exc}") from exc

    cone_spec = None
    allow_deg1 = False
    if map_data is not None:
        _require(isinstance(map_data, dict), "map must be an object")
        map_data = dict(map_data)
        cone_spec = map_data.pop("cone", None)
        allow_deg1 = bool(map_data.pop("allow_degree_one", False))

    grid_n = data.get("grid_n", 256)
    _require(isinstance(grid_n, int) and 16 <= grid_n <= 4096
             and grid_n & (grid_n - 1) == 0,
             f"grid_n must be a power of two in [16, 4096], got {grid_n!r}")
    depth = data.get("depth", 60)
    _require(isinstance(depth, int) and depth >= 1,
             f"depth must be a positive integer, got {depth!r}")

    tols = _merged(data.get("tolerances"), _TOL_DEFAULTS, "tolerances")
    for k, v in tols.items():
        _require(isinstance(v, (int, float)) and v > 0.0,
                 f"tolerance {k} must be positive, got {v!r}")

    seeds = data.get("seeds", 4)
    _require(isinstance(seeds, int) and seeds >= 1,
             f"seeds must be a positive integer, got {seeds!r}")
    period_max = data.get("period_max", 2)
    _require(isinstance(period_max, int) and period_max >= 1,
             f"period_max must be a positive integer, got {period_max!r}")
    n_max = data.get("n_max", 8)
    _require(isinstance(n_max, int) and n_max >= 1,
             f"n_max must be a positive integer, got {n_max!r}")

    trace = _merged(data.get("trace"), _TRACE_DEFAULTS, "trace")
    _require(isinstance(trace["step"], (int, float)) and trace["step"] > 0.0,
             "trace.step must be positive")
    _require(trace["max_len"] > trace["step"], "trace.max_len must exceed trace.step")

    growth = _merged(data.get("growth"), _GROWTH_DEFAULTS, "growth")
    _require(growth["cell"] > 0.0, "growth.cell must be positive")
    _require(growth["c"] > 0.0, "growth.c must be positive")
    if growth["K"] is not None:
        _require(growth["K"] > 0.0, "growth.K must be positive")
    if growth["segment"] is not None:
        seg = growth["segment"]
        ok = (isinstance(seg, list) and len(seg) >= 2
              and all(isinstance(p, list) and len(p) == 2 for p in seg))
        _require(ok, "growth.segment must be a list of [x, y] pairs")

    solver = _merged(data.get("solver"), _SOLVER_DEFAULTS, "solver")
    shape = tuple(solver["shape"])
    _require(len(shape) == 2 and all(isinstance(v, int) for v in shape)
             and shape[0] >= 3 and shape[1] >= 4,
             f"solver.shape must be [height >= 3, width >= 4], got {list(shape)!r}")
    solver["shape"] = shape
    _require(isinstance(solver["max_iters"], int) and solver["max_iters"] >= 1,
             "solver.max_iters must be a positive integer")

    rng_seed = data.get("rng_seed", 0)
    _require(isinstance(rng_seed, int) and rng_seed >= 0,
             f"rng_seed must be a nonnegative integer, got {rng_seed!r}")

    return RunConfig(
        map_spec=map_data,
        cone_spec=cone_spec,
        strip_spec=data.get("strip"),
        allow_degree_one=allow_deg1,
        grid_n=grid_n,
        depth=depth,
        tolerances=tols,
        seeds=seeds,
        period_max=period_max,
        n_max=n_max,
        trace=trace,
        growth=growth,
        solver=solver,
        output_dir=data.get("output_dir", "."),
        rng_seed=rng_seed,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    cfg = parse_config(data, base_dir=os.path.dirname(os.path.abspath(path)))
    if cfg.strip_spec is not None:
        _check_keys(cfg.strip_spec, ("ell", "fx_terms", "fy_terms"), "strip")
    return cfg
