import json

from fractions import Fraction as F

import pytest

from plslope import TransitivityStatus
from plslope.dynamics_checks import TransitivityVerdict
from plslope.entropy import perron_root
from plslope.parry import constant_slope_model
from plslope.persist.jsonpersist import (MapParseError, parse_map, read_map, map_to_dict, map_to_json, map_digest,
        write_map, jsonable, estimate_to_dict, verdict_to_dict, csmodel_to_dict)


def test_parse_map(horseshoe):
    text = json.dumps({"dots": [["0", "0"], ["1/3", "1"], ["2/3", "0"], ["1", "1"]]})
    assert parse_map(text) == horseshoe
    text = json.dumps({"domain": ["0", "3"], "dots": [[0, 0], [1, 3], [2, 0], [3, 3]]})
    f = parse_map(text)
    assert f == horseshoe
    assert f.scale == 3


def test_parse_map_refuses_decimals():
    with pytest.raises(MapParseError) as err:
        parse_map(json.dumps({"dots": [[0, 0], [0.5, 1], [1, 0]]}))
    assert err.value.dot == 1
    assert "decimal" in str(err.value)


def test_parse_map_points_at_bad_dot():
    with pytest.raises(MapParseError) as err:
        parse_map(json.dumps({"dots": [["0", "0"], ["1/2", "3/2"], ["1", "1"]]}))
    assert err.value.dot == 1
    assert str(err.value).count("dot 1") == 1


def test_parse_map_reports_json_position():
    with pytest.raises(MapParseError) as err:
        parse_map('{"dots": [["0", "0"],\n ["1", ]]}')
    assert err.value.line == 2
    assert err.value.column is not None
    with pytest.raises(MapParseError):
        parse_map(json.dumps([["0", "0"], ["1", "1"]]))


def test_map_files_round_trip(tmp_path, example2):
    data = map_to_dict(example2)
    assert data["domain"] == ["0", "72"]
    assert data["dots"][0] == ["0", "32"]
    path = tmp_path / "example2.json"
    write_map(example2, str(path))
    again = read_map(str(path))
    assert again == example2
    assert map_digest(again) == map_digest(example2)
    assert map_digest(again) != map_digest(parse_map(map_to_json(example2).replace('"32"', '"31"', 1)))


def test_jsonable():
    assert jsonable(F(1, 3)) == "1/3"
    assert jsonable(0.1) == "0.10000000000000001"
    assert jsonable({"a": [F(2), None, True]}) == {"a": ["2", None, True]}
    assert jsonable(TransitivityStatus.Unknown) == "Unknown"


def test_result_dicts(horseshoe):
    estimate = estimate_to_dict(perron_root([[1, 1, 1]] * 3))
    assert estimate["method"] == "MarkovExact"
    assert estimate["lambda_bracket"] == ["3", "3"]
    verdict = verdict_to_dict(TransitivityVerdict(TransitivityStatus.NotTransitive, {"invariant_interval": ["0", "1/2"]}))
    assert verdict == {"status": "NotTransitive", "transitive": False, "evidence": {"invariant_interval": ["0", "1/2"]}}
    model = csmodel_to_dict(constant_slope_model(horseshoe))
    assert model["psi"] == [["0", "0"], ["1", "1"]]
    assert model["model"] == [["0", "0"], ["1/3", "1"], ["2/3", "0"], ["1", "1"]]
    assert model["flag"] == "untrusted: transitivity unverified"
