"""Scenario files: YAML with SI units carried in the key names.

Example::

    model: timoshenko
    params: {length_m: 1.0, radius_m: 0.02, tip_mass_kg: 2.0, release_time_s: 7.0}
    grid: {half_steps: 11}
    time: {dt_s: 1.0e-3, t_end_s: 14.0}
    output: {snapshot_times_s: [0.0, 7.0, 14.0]}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .core import EDGES, ContinuousModel, ModelError
from .discretize import boundary_signals, discretize
from .models import MindlinParams, TimoshenkoParams, mindlin, timoshenko, wave_1d, wave_2d
from .simulate import Signal
from .system import DiscreteSystem

MODELS = ("wave_1d", "timoshenko", "wave_2d", "mindlin")

PARAM_KEYS = {
    "wave_1d": {"density_kg_m3", "modulus_pa", "length_m"},
    "wave_2d": {"density_kg_m3", "modulus_pa", "length_x_m", "length_y_m"},
    "timoshenko": {
        "length_m", "radius_m", "area_m2", "second_moment_m4", "density_kg_m3",
        "young_modulus_pa", "poisson_ratio", "shear_factor", "tip_mass_kg", "release_time_s",
    },
    "mindlin": {
        "length_x_m", "length_y_m", "thickness_m", "density_kg_m3", "young_modulus_pa",
        "poisson_ratio", "shear_factor", "mass_kg", "clamped_edge", "loaded_edge",
        "free_edges", "attachment_m", "release_time_s",
    },
}
TOP_KEYS = {"model", "params", "grid", "time", "initial", "boundary", "output", "sweep"}
GRID_KEYS = {"half_steps", "n1", "n2"}
TIME_KEYS = {"dt_s", "t_end_s"}
INITIAL_KEYS = {"kind", "mode", "seed"}
INITIAL_KINDS = ("rest", "equilibrium", "mode", "random")
OUTPUT_KEYS = {"snapshot_times_s", "selected_states", "record_every", "ports"}
SWEEP_KEYS = {"levels", "mode"}
SIGNAL_KEYS = {"kind", "value", "release_time_s", "point_m"}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Scenario:
    model_name: str
    model: ContinuousModel
    resolution: Any
    dt: float
    t_end: float
    initial: dict = field(default_factory=lambda: {"kind": "rest"})
    snapshot_times: list[float] = field(default_factory=list)
    selected_states: list[int] = field(default_factory=list)
    record_every: int = 1
    ports: str = "loaded"
    sweep_levels: int = 4
    sweep_mode: int = 1
    source: str = ""

    def build(self) -> tuple[DiscreteSystem, list[Signal]]:
        sys = discretize(self.model, self.resolution)
        return sys, boundary_signals(sys, self.model)

    def with_time(self, dt: float | None = None, t_end: float | None = None) -> "Scenario":
        out = Scenario(**self.__dict__)
        if dt is not None:
            out.dt = float(dt)
        if t_end is not None:
            out.t_end = float(t_end)
        return out


def _unknown(section: str, got: dict, allowed: set, errors: list):
    for key in sorted(set(got) - allowed):
        errors.append(f"unknown key {section + '.' if section else ''}{key}")


def _section(cfg: dict, name: str, errors: list) -> dict:
    val = cfg.get(name, {}) or {}
    if not isinstance(val, dict):
        errors.append(f"{name} must be a mapping")
        return {}
    return val


def _number(d: dict, key: str, section: str, errors: list, default=None, positive=True):
    if key not in d:
        if default is None:
            errors.append(f"missing {section}.{key}")
        return default
    try:
        v = float(d[key])
    except (TypeError, ValueError):
        errors.append(f"{section}.{key} must be a number, got {d[key]!r}")
        return default
    if not math.isfinite(v) or (positive and v <= 0):
        errors.append(f"{section}.{key} must be {'positive' if positive else 'finite'}, got {v}")
        return default
    return v


def _signal(entry, where: str, errors: list) -> Signal | None:
    if entry is None:
        return None
    if not isinstance(entry, dict):
        errors.append(f"{where} must be a mapping")
        return None
    _unknown(where, entry, SIGNAL_KEYS, errors)
    try:
        kind = entry.get("kind", "zero")
        if kind == "zero":
            return Signal.zero()
        value = [float(v) for v in (entry["value"] if isinstance(entry["value"], list) else [entry["value"]])]
        if kind == "constant":
            return Signal.constant(value)
        if kind == "step_release":
            return Signal.step_release(value, float(entry["release_time_s"]))
        errors.append(f"{where}.kind must be zero, constant or step_release, got {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: bad signal ({exc})")
    return None


def _build_model(name: str, params: dict, boundary: dict, errors: list) -> ContinuousModel | None:
    sec = "params"
    num = lambda key, default=None, positive=True: _number(params, key, sec, errors, default, positive)
    if name == "wave_1d":
        _unknown("boundary", boundary, {"a", "b", "signal_a", "signal_b"}, errors)
        model_kw = dict(
            density=num("density_kg_m3", 1.0), modulus=num("modulus_pa", 1.0), length=num("length_m", 1.0),
            at_a=boundary.get("a", "p"), at_b=boundary.get("b", "q"),
            signal_a=_signal(boundary.get("signal_a"), "boundary.signal_a", errors),
            signal_b=_signal(boundary.get("signal_b"), "boundary.signal_b", errors),
        )
        return None if errors else wave_1d(**model_kw)
    if name == "wave_2d":
        _unknown("boundary", boundary, set(EDGES) | {"loads"}, errors)
        loads = {}
        for k, entry in enumerate(boundary.get("loads", []) or []):
            sig = _signal(entry, f"boundary.loads[{k}]", errors)
            pt = entry.get("point_m") if isinstance(entry, dict) else None
            if sig is not None:
                if not (isinstance(pt, list) and len(pt) == 2):
                    errors.append(f"boundary.loads[{k}].point_m must be [x, y]")
                else:
                    loads[(float(pt[0]), float(pt[1]))] = sig
        edges = {e: boundary[e] for e in EDGES if e in boundary}
        model_kw = dict(
            density=num("density_kg_m3", 1.0), modulus=num("modulus_pa", 1.0),
            L1=num("length_x_m", 1.0), L2=num("length_y_m", 1.0), edges=edges, loads=loads,
        )
        return None if errors else wave_2d(**model_kw)
    if boundary:
        errors.append(f"boundary section is fixed by the {name} model; remove it")
    if name == "timoshenko":
        kw = {}
        for key, attr in (("length_m", "length"), ("density_kg_m3", "density"),
                          ("young_modulus_pa", "young_modulus"), ("poisson_ratio", "poisson_ratio"),
                          ("shear_factor", "shear_factor"), ("release_time_s", "release_time")):
            if key in params:
                kw[attr] = num(key, positive=key != "release_time_s")
        if "tip_mass_kg" in params:
            kw["tip_mass"] = num("tip_mass_kg", positive=False)
        if "area_m2" in params or "second_moment_m4" in params:
            if "radius_m" in params:
                errors.append("give either params.radius_m or params.area_m2/second_moment_m4, not both")
            kw["area"] = num("area_m2")
            kw["second_moment"] = num("second_moment_m4")
            make = lambda: TimoshenkoParams(**kw)
        else:
            radius = num("radius_m", 0.02)
            make = lambda: TimoshenkoParams.disc(radius, **kw)
        if errors:
            return None
        return timoshenko(make())
    if name == "mindlin":
        kw = {}
        for key, attr in (("length_x_m", "L1"), ("length_y_m", "L2"), ("thickness_m", "thickness"),
                          ("density_kg_m3", "density"), ("young_modulus_pa", "young_modulus"),
                          ("poisson_ratio", "poisson_ratio"), ("shear_factor", "shear_factor"),
                          ("attachment_m", "attachment")):
            if key in params:
                kw[attr] = num(key)
        for key, attr in (("mass_kg", "mass"), ("release_time_s", "release_time")):
            if key in params:
                kw[attr] = num(key, positive=False)
        for key in ("clamped_edge", "loaded_edge"):
            if key in params:
                kw[key] = str(params[key])
        clamped = kw.get("clamped_edge", "left")
        loaded = kw.get("loaded_edge", "right")
        tagged = {clamped: "clamped"}
        if loaded in tagged:
            errors.append(f"edge {loaded!r} tagged twice (clamped and loaded)")
        tagged[loaded] = "loaded"
        free = params.get("free_edges")
        for edge in free or []:
            if edge in tagged:
                errors.append(f"edge {edge!r} tagged twice ({tagged[edge]} and free)")
            tagged[edge] = "free"
        if free is not None and not errors and set(tagged) != set(EDGES):
            errors.append(f"params.free_edges must be the two edges beside the clamped one, got {free}")
        if errors:
            return None
        return mindlin(MindlinParams(**kw))
    return None


def parse_config(path) -> Scenario:
    """Read and fully validate a scenario; raises ConfigError listing every problem."""
    path = Path(path)
    text = path.read_text()
    try:
        cfg = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"not valid YAML: {exc}"])
    return scenario_from_dict(cfg, source=str(path))


def scenario_from_dict(cfg: dict, source: str = "") -> Scenario:
    errors: list[str] = []
    if not isinstance(cfg, dict):
        raise ConfigError(["top level must be a mapping"])
    _unknown("", cfg, TOP_KEYS, errors)
    name = cfg.get("model")
    if name not in MODELS:
        raise ConfigError(errors + [f"model must be one of {', '.join(MODELS)}, got {name!r}"])

    params = _section(cfg, "params", errors)
    grid = _section(cfg, "grid", errors)
    time = _section(cfg, "time", errors)
    initial = _section(cfg, "initial", errors)
    boundary = _section(cfg, "boundary", errors)
    output = _section(cfg, "output", errors)
    sweep = _section(cfg, "sweep", errors)
    _unknown("params", params, PARAM_KEYS[name], errors)
    for sec, got, allowed in (("grid", grid, GRID_KEYS), ("time", time, TIME_KEYS), ("initial", initial, INITIAL_KEYS),
                              ("output", output, OUTPUT_KEYS), ("sweep", sweep, SWEEP_KEYS)):
        _unknown(sec, got, allowed, errors)

    two_d = name in ("wave_2d", "mindlin")
    resolution = None
    try:
        if two_d:
            if "half_steps" in grid:
                errors.append("grid.half_steps is for 1D models; use grid.n1 and grid.n2")
            resolution = (int(grid.get("n1", 15)), int(grid.get("n2", 10)))
        else:
            if "n1" in grid or "n2" in grid:
                errors.append("grid.n1/n2 are for 2D models; use grid.half_steps")
            resolution = int(grid.get("half_steps", 11))
    except (TypeError, ValueError):
        errors.append("grid sizes must be integers")

    dt = _number(time, "dt_s", "time", errors, 1e-3)
    t_end = _number(time, "t_end_s", "time", errors, 1.0)
    kind = initial.get("kind", "rest")
    if kind not in INITIAL_KINDS:
        errors.append(f"initial.kind must be one of {', '.join(INITIAL_KINDS)}, got {kind!r}")
    if kind == "mode" and name not in ("wave_1d", "wave_2d"):
        errors.append("initial.kind = mode needs a wave model")

    snaps = output.get("snapshot_times_s", []) or []
    try:
        snaps = [float(s) for s in snaps]
    except (TypeError, ValueError):
        errors.append("output.snapshot_times_s must be a list of numbers")
        snaps = []
    if any(s < 0 or (t_end and s > t_end + 1e-12) for s in snaps):
        errors.append("output.snapshot_times_s must lie within [0, t_end_s]")
    selected = output.get("selected_states", []) or []
    record_every = output.get("record_every", 1)
    if not (isinstance(record_every, int) and record_every >= 1):
        errors.append("output.record_every must be a positive integer")
        record_every = 1
    ports = output.get("ports", "loaded")
    if ports not in ("loaded", "all", "none"):
        errors.append("output.ports must be loaded, all or none")

    model = None
    try:
        model = _build_model(name, params, boundary, errors)
    except ModelError as exc:
        errors.append(str(exc))
    if errors:
        raise ConfigError(errors)

    scenario = Scenario(
        model_name=name, model=model, resolution=resolution, dt=dt, t_end=t_end,
        initial={"kind": kind, "mode": initial.get("mode", 1), "seed": int(initial.get("seed", 0))},
        snapshot_times=sorted(snaps), selected_states=[int(s) for s in selected],
        record_every=record_every, ports=ports,
        sweep_levels=int(sweep.get("levels", 4)), sweep_mode=int(sweep.get("mode", 1)), source=source,
    )
    # grid/boundary feasibility belongs to validation
    try:
        sys, _ = scenario.build()
    except ModelError as exc:
        raise ConfigError([str(exc)])
    bad = [s for s in scenario.selected_states if not 0 <= s < sys.n_states]
    if bad:
        raise ConfigError([f"output.selected_states {bad} out of range (system has {sys.n_states} states)"])
    return scenario
