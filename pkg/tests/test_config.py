import math

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from chemoflux.config import (CHECK_SUITES, MODES, RunConfig, build_config, dump_config,
                              load_yaml, parse_config, parse_override, preset_dict)
from chemoflux.errors import AssumptionError, ConfigError
from chemoflux.model import figure1_preset


def _write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _roundtrip(config: RunConfig) -> RunConfig:
    return build_config(yaml.safe_load(dump_config(config)))


def test_preset_expands_to_the_figure1_model():
    config = build_config({"preset": "figure1"})
    params, funcs, init = figure1_preset()
    assert config.params == params
    assert config.functions == funcs
    assert config.initial == init
    assert config.mode == "simulate"


def test_round_trip_is_exact():
    config = build_config({"preset": "figure1", "mesh": {"n_cells": 64},
                           "solver": {"dt_max": 1e-3, "t_end": 0.3,
                                      "advection_scheme": "central"}})
    again = _roundtrip(config)
    assert again == config
    assert dump_config(again) == dump_config(config)


@settings(max_examples=30)
@given(st.floats(1e-6, 10.0), st.floats(0.01, 100.0), st.integers(4, 4000),
       st.floats(0.05, 1.0))
def test_round_trip_property(dt, t_end, n, cfl):
    config = build_config({"preset": "figure1", "mesh": {"n_cells": n},
                           "solver": {"dt_max": dt, "t_end": t_end, "cfl_safety": cfl}})
    again = _roundtrip(config)
    assert again == config
    assert again.solver.dt_max == dt  # bit-exact float


REPO_CONFIGS = {"figure1.yaml": "simulate", "picard.yaml": "picard", "steady.yaml": "steady",
                "decay.yaml": "averages", "check.yaml": "check"}


@pytest.mark.parametrize("name,mode", sorted(REPO_CONFIGS.items()))
def test_config_files_in_repo_parse(name, mode):
    from pathlib import Path
    path = Path(__file__).resolve().parent.parent / "configs" / name
    config = parse_config(path, mode=mode)
    assert config.mode == mode
    assert _roundtrip(config) == config


def test_empty_file_is_an_error(tmp_path):
    with pytest.raises(ConfigError, match="empty"):
        load_yaml(_write(tmp_path, ""))


def test_missing_file_is_an_error(tmp_path):
    with pytest.raises(ConfigError):
        load_yaml(tmp_path / "nope.yaml")


def test_parse_error_reports_the_line(tmp_path):
    path = _write(tmp_path, "mesh:\n  n_cells: 10\nsolver: [1, 2\n")
    with pytest.raises(ConfigError, match="line"):
        load_yaml(path)


def test_negative_diffusivity_is_rejected():
    raw = preset_dict("figure1")
    raw["params"]["d1"] = -1.0
    with pytest.raises(AssumptionError):
        build_config(raw)


@pytest.mark.parametrize("raw", [
    {"preset": "figure1", "colour": 1},
    {"preset": "figure1", "mesh": {"n_cells": 10, "extra": 1}},
    {"preset": "figure1", "solver": {"dt_max": 1e-3, "t_end": 1.0, "speed": 2}},
    {"preset": "figure1", "output": {"formats": ["png"]}},
    {"preset": "figure1", "check": {"suites": ["nope"]}},
    {"preset": "nope"},
    {"preset": "figure1", "mode": "dance"},
    {"preset": "figure1", "mesh": {"n_cells": 2}},
    {"preset": "figure1", "mesh": {"n_cells": True}},
    {"preset": "figure1", "picard": {"iterations": 3}},
    {"preset": "figure1", "picard": {"horizons": []}},
    {"preset": "figure1", "averages": {"samples": 1}},
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        build_config(raw)


def test_params_need_every_coefficient():
    raw = preset_dict("figure1")
    del raw["params"]["mu"]
    with pytest.raises(ConfigError, match="missing"):
        build_config(raw)
    raw = preset_dict("figure1")
    raw["params"]["mu"] = "fast"
    with pytest.raises(ConfigError):
        build_config(raw)


def test_model_modes_need_a_model():
    with pytest.raises(ConfigError):
        build_config({"mode": "simulate"})
    assert build_config({"mode": "steady"}).mode == "steady"
    assert build_config({"mode": "check"}).check.suites == CHECK_SUITES


def test_set_overrides():
    config = build_config({"preset": "figure1"},
                          overrides=["mesh.n_cells=50", "solver.t_end=2.5",
                                     "params.alpha1=3", "output.formats=[json]"])
    assert config.n_cells == 50
    assert config.solver.t_end == 2.5
    assert config.params.alpha1 == 3.0
    assert config.output.formats == ("json",) or list(config.output.formats) == ["json"]
    with pytest.raises(ConfigError):
        build_config({"preset": "figure1"}, overrides=["bogus.key=1"])
    with pytest.raises(ConfigError):
        build_config({"preset": "figure1"}, overrides=["mesh.n_cells.deep=1"])


@pytest.mark.parametrize("item", ["novalue", "=3", "a.b=[1,"])
def test_bad_override_syntax(item):
    with pytest.raises(ConfigError):
        parse_override(item)


def test_override_value_parsing():
    assert parse_override("solver.dt_max=1e-3") == ("solver.dt_max", 1e-3)
    assert parse_override("mesh.n_cells=12") == ("mesh.n_cells", 12)
    assert parse_override("solver.advection_scheme=central") == (
        "solver.advection_scheme", "central")


def test_exponent_floats_load_as_floats(tmp_path):
    path = _write(tmp_path, "preset: figure1\nsolver:\n  dt_max: 1e-3\n  t_end: 2\n")
    config = parse_config(path)
    assert config.solver.dt_max == 1e-3 and isinstance(config.solver.dt_max, float)


def test_mode_argument_wins():
    assert build_config({"preset": "figure1", "mode": "simulate"}, mode="steady").mode == "steady"
    assert set(MODES) == {"simulate", "picard", "steady", "averages", "check"}


def test_waivers_gate_the_figure1_model():
    raw = preset_dict("figure1")
    assert build_config(raw).waivers == ("figure1",)
    raw["waivers"] = []
    with pytest.raises(AssumptionError, match="assumption"):
        build_config(raw)
    raw["waivers"] = ["made-up"]
    with pytest.raises(ConfigError):
        build_config(raw)

