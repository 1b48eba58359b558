"""Run configuration: YAML parsing, preset expansion, overrides and round-trip writing."""
from __future__ import annotations

import copy
import math
import re
from dataclasses import asdict, dataclass, field, fields

import yaml

from .errors import AssumptionError, ConfigError
from .model import (InitialData, ModelFunctions, Parameters, PARAM_NAMES, figure1_preset,
                    validate)
from .solver import SolverConfig

MODES = ("simulate", "picard", "steady", "averages", "check")
FORMATS = ("csv", "json", "svg")
PRESETS = ("figure1",)
CHECK_SUITES = ("positivity", "mass_balance", "conservation", "symmetry", "averages",
                "green", "steady", "picard")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    formats: tuple = ("csv", "json")

    def __post_init__(self):
        formats = tuple(self.formats)
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats {bad}; known: {list(FORMATS)}")
        object.__setattr__(self, "formats", formats)


@dataclass(frozen=True)
class PicardConfig:
    horizons: tuple = (0.025,)
    iterations: int = 6
    time_steps: int = 100
    scheme: str = "upwind"

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(float(h) for h in self.horizons))
        if not self.horizons or any(not h > 0 for h in self.horizons):
            raise ConfigError("picard.horizons must be a nonempty list of positive times")
        if self.iterations < 4:
            raise ConfigError("picard.iterations must be >= 4")
        if self.time_steps < 1:
            raise ConfigError("picard.time_steps must be >= 1")


@dataclass(frozen=True)
class SteadyConfig:
    gamma: float = 2.0
    delta: float = 1.0
    P: float = 1.0
    K1: float = 1.0
    x0: float = 0.0
    C: float = 1.0
    D: float = 1.0
    n_points: int = 10_000
    fd_step: float = 2e-3


@dataclass(frozen=True)
class AveragesConfig:
    samples: int = 101
    compare_simulation: bool = False

    def __post_init__(self):
        if self.samples < 2:
            raise ConfigError("averages.samples must be >= 2")


@dataclass(frozen=True)
class CheckConfig:
    suites: tuple = CHECK_SUITES
    seed: int = 0

    def __post_init__(self):
        suites = tuple(self.suites)
        bad = [s for s in suites if s not in CHECK_SUITES]
        if bad:
            raise ConfigError(f"unknown check suites {bad}; known: {list(CHECK_SUITES)}")
        object.__setattr__(self, "suites", suites)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "simulate"
    preset: str | None = None
    n_cells: int = 200
    solver: SolverConfig | None = None
    params: Parameters | None = None
    functions: ModelFunctions | None = None
    initial: InitialData | None = None
    waivers: tuple = ()
    output: OutputConfig = OutputConfig()
    picard: PicardConfig = PicardConfig()
    steady: SteadyConfig = SteadyConfig()
    averages: AveragesConfig = AveragesConfig()
    check: CheckConfig = CheckConfig()

    def to_dict(self) -> dict:
        d = {
            "mode": self.mode,
            "preset": self.preset,
            "mesh": {"n_cells": self.n_cells},
            "waivers": list(self.waivers),
            "output": {"dir": self.output.dir, "formats": list(self.output.formats)},
            "picard": {**asdict(self.picard), "horizons": list(self.picard.horizons)},
            "steady": asdict(self.steady),
            "averages": asdict(self.averages),
            "check": {"suites": list(self.check.suites), "seed": self.check.seed},
        }
        if self.solver is not None:
            d["solver"] = self.solver.to_dict()
        if self.params is not None:
            d["params"] = self.params.to_dict()
        if self.functions is not None:
            d["functions"] = self.functions.to_dict()
        if self.initial is not None:
            d["initial"] = self.initial.to_dict()
        return d

    def require_model(self):
        missing = [name for name in ("solver", "params", "functions", "initial")
                   if getattr(self, name) is None]
        if missing:
            raise ConfigError(f"mode {self.mode!r} needs config blocks {missing} "
                              "(or preset: figure1)")


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot, such as ``1e-3``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                  |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                  |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                  |[-+]?\.(?:inf|Inf|INF)
                  |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def yaml_load(text):
    return yaml.load(text, Loader=_Loader)


TOP_KEYS = {"mode", "preset", "mesh", "solver", "params", "functions", "initial", "waivers",
            "output", "picard", "steady", "averages", "check"}


def preset_dict(name: str) -> dict:
    if name != "figure1":
        raise ConfigError(f"unknown preset {name!r}; known: {list(PRESETS)}")
    params, funcs, init = figure1_preset()
    return {
        "mesh": {"n_cells": 200},
        "solver": SolverConfig(dt_max=1e-3, t_end=20.0, snapshot_every=5000,
                               diagnostics_every=500).to_dict(),
        "params": params.to_dict(),
        "functions": funcs.to_dict(),
        "initial": init.to_dict(),
        "waivers": ["figure1"],
    }


def _merge(base, override):
    """Recursive merge; a mapping carrying ``kind`` replaces its counterpart wholesale."""
    if not isinstance(base, dict) or not isinstance(override, dict):
        return copy.deepcopy(override)
    if "kind" in override and override.get("kind") != base.get("kind"):
        return copy.deepcopy(override)
    out = copy.deepcopy(base)
    for key, value in override.items():
        out[key] = _merge(out[key], value) if key in out else copy.deepcopy(value)
    return out


def _set_dotted(raw: dict, key: str, value):
    parts = key.split(".")
    node = raw
    for part in parts[:-1]:
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        if not isinstance(child, dict):
            raise ConfigError(f"--set {key}: {part!r} is not a section")
        node = child
    node[parts[-1]] = value


def parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, text = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    try:
        value = yaml_load(text) if text.strip() else ""
    except yaml.YAMLError as exc:
        raise ConfigError(f"--set {key}: cannot parse value {text!r}") from exc
    return key, value


def load_yaml(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: parse error at {where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    if raw is None:
        raise ConfigError(f"{path}: config file is empty")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return raw


def _section(raw, name, cls, skip=()):
    block = raw.get(name)
    if block is None:
        return cls()
    if not isinstance(block, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)} - set(skip)
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    try:
        return cls(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section {name!r}: {exc}") from exc


def build_config(raw: dict, overrides=(), mode: str | None = None) -> RunConfig:
    """Validate a raw mapping (preset expanded, overrides applied) into a RunConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    raw = copy.deepcopy(raw)
    preset = raw.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; known: {list(PRESETS)}")
        raw = _merge(preset_dict(preset), raw)
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        if key.split(".")[0] not in TOP_KEYS:
            raise ConfigError(f"--set {key}: unknown top-level key")
        _set_dotted(raw, key, value)
    if mode is not None:
        raw["mode"] = mode

    mode = raw.get("mode", "simulate")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; known: {list(MODES)}")

    mesh = raw.get("mesh") or {}
    if not isinstance(mesh, dict) or set(mesh) - {"n_cells"}:
        raise ConfigError("section 'mesh' accepts only n_cells")
    n_cells = mesh.get("n_cells", 200)
    if not isinstance(n_cells, int) or isinstance(n_cells, bool) or n_cells < 4:
        raise ConfigError(f"mesh.n_cells must be an integer >= 4, got {n_cells!r}")

    solver = None
    if raw.get("solver") is not None:
        block = raw["solver"]
        if not isinstance(block, dict):
            raise ConfigError("section 'solver' must be a mapping")
        known = {f.name for f in fields(SolverConfig)}
        bad = set(block) - known
        if bad:
            raise ConfigError(f"unknown keys in 'solver': {sorted(bad)}")
        try:
            solver = SolverConfig(**block)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"section 'solver': {exc}") from exc

    params = None
    if raw.get("params") is not None:
        block = raw["params"]
        if not isinstance(block, dict):
            raise ConfigError("section 'params' must be a mapping")
        bad = set(block) - set(PARAM_NAMES)
        if bad:
            raise ConfigError(f"unknown keys in 'params': {sorted(bad)}")
        missing = set(PARAM_NAMES) - set(block) - {"k_capacity"}
        if missing:
            raise ConfigError(f"missing keys in 'params': {sorted(missing)}")
        for key, value in block.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"params.{key} must be a number, got {value!r}")
        params = Parameters(**block)

    functions = None
    if raw.get("functions") is not None:
        try:
            functions = ModelFunctions.from_dict(raw["functions"])
        except (TypeError, AttributeError) as exc:
            raise ConfigError(f"section 'functions': {exc}") from exc

    initial = None
    if raw.get("initial") is not None:
        try:
            initial = InitialData.from_dict(raw["initial"])
        except (TypeError, AttributeError) as exc:
            raise ConfigError(f"section 'initial': {exc}") from exc

    waivers = tuple(raw.get("waivers") or ())
    config = RunConfig(
        mode=mode, preset=preset, n_cells=n_cells, solver=solver, params=params,
        functions=functions, initial=initial, waivers=waivers,
        output=_section(raw, "output", OutputConfig),
        picard=_section(raw, "picard", PicardConfig),
        steady=_section(raw, "steady", SteadyConfig),
        averages=_section(raw, "averages", AveragesConfig),
        check=_section(raw, "check", CheckConfig),
    )
    if params is not None and functions is not None:
        try:
            report = validate(params, functions, waivers=waivers)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not report.passed:
            lines = "; ".join(f"assumption ({v.assumption}): {v.message}"
                              for v in report.violations)
            raise AssumptionError(f"model validation failed: {lines}")
    if mode in ("simulate", "picard", "averages"):
        config.require_model()
    return config


def parse_config(path, overrides=(), mode: str | None = None) -> RunConfig:
    return build_config(load_yaml(path), overrides=overrides, mode=mode)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError("config values must be finite")
    return value


def dump_config(config: RunConfig) -> str:
    """Fully expanded YAML; ``parse`` of the result reproduces ``config`` exactly."""
    return yaml.safe_dump(_plain(config.to_dict()), sort_keys=True, default_flow_style=False)


def write_config(config: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(config))
