import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chemoflux.output import (dumps_json, jsonable, read_csv, svg_line_plot, write_rows,
                              write_diagnostics_csv)


def test_nonfinite_json_values_become_strings():
    doc = json.loads(dumps_json({"a": math.inf, "b": -math.inf, "c": math.nan,
                                 "d": np.float64(1.5), "e": np.arange(3), "f": np.bool_(True)}))
    assert doc == {"a": "inf", "b": "-inf", "c": "nan", "d": 1.5, "e": [0, 1, 2], "f": True}


def test_json_keys_sorted_and_stable():
    text = dumps_json({"z": 1, "a": {"y": 2, "b": 3}})
    assert text.index('"a"') < text.index('"z"')
    assert text.endswith("\n")
    assert dumps_json({"z": 1, "a": {"y": 2, "b": 3}}) == text


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_floats_round_trip_exactly(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    write_rows(path, ("i", "x"), enumerate(values))
    header, data = read_csv(path)
    assert header == ["i", "x"]
    assert data[:, 1].tolist() == [float(v) for v in values]


def test_bool_and_int_formatting(tmp_path):
    path = write_rows(tmp_path / "x.csv", ("a", "b"), [(True, 3), (False, np.int64(4))])
    assert path.read_text().splitlines() == ["a,b", "1,3", "0,4"]


def test_empty_diagnostics_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_diagnostics_csv(tmp_path / "d.csv", [])


def test_svg_is_well_formed():
    x = np.linspace(0, 1, 11)
    svg = svg_line_plot({"u": (x, x**2), "v": (x, np.full_like(x, np.nan))}, title="t")
    root = ET.fromstring(svg.split("\n", 1)[1])
    assert root.tag.endswith("svg") and root.get("version") == "1.1"
    lines = [el for el in root if el.tag.endswith("polyline")]
    assert len(lines) == 2
    assert len(lines[0].get("points").split()) == 11
    assert lines[1].get("points") == ""


def test_svg_constant_series():
    svg = svg_line_plot({"c": ([0, 0], [1, 1])})
    assert "nan" not in svg and "inf" not in svg


def test_jsonable_dataclass():
    from chemoflux.model import figure1_preset
    p = figure1_preset()[0]
    assert jsonable(p)["d1"] == p.d1
