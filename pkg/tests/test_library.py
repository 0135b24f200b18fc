import json

import numpy as np
import pytest

from tripfit import default_library, parse_library
from tripfit.library import library_to_jsonable, load_library


def test_default_library_targets(library):
    assert library.targets() == ("A", "B", "C", "D", "mixed_commercial")
    assert set(library.schemes) >= {"P1", "P2", "P3", "P4", "P5", "P1-P4-P5"}


def test_motor_fraction_columns_sum_to_one(library):
    for col, motor in enumerate(library.motor_classes):
        total = sum(row[col] for row in library.fraction_table.values())
        assert total == pytest.approx(1.0, abs=1e-9), motor


def test_motor_c_is_single_scheme(library):
    comp = library.composite("C")
    assert comp.names == ("P2-P5",)
    assert comp.fractions[0] == 1.0


def test_combination_zones_are_unions(library):
    for name in ("P2-P4", "P1-P4-P5", "P3-P4-P5"):
        combo = library.scheme(name)
        members = [library.scheme(part) for part in name.split("-")]
        tau = np.linspace(0, 5, 101)[:, None]
        v = np.linspace(0, 100, 101)[None, :]
        member_any = np.zeros((101, 101), dtype=bool)
        for m in members:
            member_any |= m.zone.contains(tau, v)
        assert np.array_equal(combo.zone.contains(tau, v), member_any)


def test_round_trip_preserves_membership(library):
    doc = library_to_jsonable(library)
    again = parse_library(json.loads(json.dumps(doc)))
    tau = np.linspace(0, 5, 201)[:, None]
    v = np.linspace(0, 100, 201)[None, :]
    for name, scheme in library.schemes.items():
        assert np.array_equal(scheme.zone.contains(tau, v), again.scheme(name).zone.contains(tau, v))


def _base_doc():
    return {
        "units": {"tau_break": "seconds", "v_threshold": "percent_of_nominal"},
        "base_schemes": {
            "P1": {"steps": [[0.1, 50.0]]},
            "P2": {"steps": [[0.2, 60.0]]},
        },
        "combinations": {"P1-P2": ["P1", "P2"]},
        "motor_classes": ["A"],
        "fraction_table": {"P1": [0.4], "P1-P2": [0.6]},
        "composites": {},
    }


def test_parse_rejects_bad_units():
    doc = _base_doc()
    doc["units"] = {"tau_break": "ms", "v_threshold": "percent_of_nominal"}
    with pytest.raises(ValueError, match="units"):
        parse_library(doc)


def test_parse_rejects_misnamed_combination():
    doc = _base_doc()
    doc["combinations"] = {"P2-P1": ["P1", "P2"]}
    with pytest.raises(ValueError, match="sorted hyphen-join"):
        parse_library(doc)


def test_parse_rejects_unknown_member():
    doc = _base_doc()
    doc["combinations"] = {"P1-P9": ["P1", "P9"]}
    with pytest.raises(ValueError, match="unknown base"):
        parse_library(doc)


def test_parse_rejects_bad_column_sum():
    doc = _base_doc()
    doc["fraction_table"]["P1"] = [0.5]
    with pytest.raises(ValueError, match="sum to"):
        parse_library(doc)


def test_parse_rejects_unknown_table_row():
    doc = _base_doc()
    doc["fraction_table"]["P9"] = [0.0]
    with pytest.raises(ValueError, match="not a known scheme"):
        parse_library(doc)


def test_parse_rejects_bad_composite_sum():
    doc = _base_doc()
    doc["composites"] = {"demo": {"P1": 0.5, "P2": 0.4}}
    with pytest.raises(ValueError, match="sum to"):
        parse_library(doc)


def test_load_library_reports_json_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"units": }')
    with pytest.raises(ValueError, match="line 1"):
        load_library(path)


def test_composite_needs_nonzero_entries(library):
    with pytest.raises(KeyError):
        library.composite("Z")
