import math

from fractions import Fraction as F

import pytest

from plslope.core_map import MapError, sup_distance, is_constant_slope, fixed_points
from plslope.lab.families import (example1, example2, example2_map, horseshoe3, modality_preserving, get_family,
        FAMILIES)
from plslope.lab.table import ExperimentTable, read_csv, read_table, format_cell, parse_cell
from plslope.lab.experiments import (theorem1_experiment, theorem3_experiment, theorem2_experiment, continuity_report,
        compare_tables, solve_model)


def test_example1_members():
    bundle = example1(F(1, 4))
    assert bundle.lam == F(7, 2)
    assert is_constant_slope(bundle.g_tilde) == F(7, 2)
    assert bundle.g == bundle.g_tilde
    small = example1(F(1, 8))
    assert small.g.modality == 8
    tiny = example1(F(1, 16))
    assert sup_distance(tiny.g, tiny.f) < sup_distance(bundle.g, bundle.f)
    with pytest.raises(MapError):
        example1(F(1, 2))


def test_example1_degenerate_member(gtilde0):
    bundle = example1(0)
    assert bundle.degenerate
    assert bundle.g is None
    assert is_constant_slope(gtilde0) == 3
    assert gtilde0.modality == 6
    assert gtilde0(F(1, 3)) == 0 and gtilde0(F(2, 3)) == 1


@pytest.mark.parametrize("t", [F(1), F(1, 2), F(1, 8)])
def test_example2_caps(t):
    bundle = example2(t)
    assert sup_distance(bundle.g, bundle.f) == t / 72
    assert bundle.g.modality == 5
    (a, b), (c, d) = bundle.caps()
    for x in bundle.f.xs:
        if not (a < x < b or c < x < d):
            assert bundle.g(x) == bundle.f(x)
    assert bundle.g(F(24, 72)) == (60 + t) / 72
    with pytest.raises(MapError):
        example2(0)


def test_families():
    assert sorted(FAMILIES) == ["example1", "example2", "modality-preserving"]
    family = get_family("modality-preserving")
    assert not family.worked_example
    assert family.member(0) == horseshoe3()
    assert get_family("example2").base() == example2_map()
    with pytest.raises(ValueError):
        get_family("nope")
    with pytest.raises(MapError):
        get_family("example1").member(0)
    with pytest.raises(MapError):
        modality_preserving(F(1, 2))


def test_table_csv():
    table = ExperimentTable("demo", ["t", "value", "flag", "note"])
    table.add_row(t=F(1, 8), value=0.25, flag=True)
    table.add_row(t=F(1, 16), value=float("nan"), flag=False, note="x")
    table.add_metadata("lam", 3.0)
    text = table.to_csv()
    assert text.splitlines()[0] == "# lam: 3.0"
    assert text.splitlines()[1] == "t,value,flag,note"
    assert text.splitlines()[2] == "1/8,0.25,true,"
    again = read_csv(text, "demo")
    assert again.meta("lam") == "3.0"
    assert again.rows[0] == {"t": F(1, 8), "value": 0.25, "flag": True, "note": None}
    assert again.to_csv() == text
    with pytest.raises(KeyError):
        table.add_row(bogus=1)


def test_table_file(tmp_path):
    table = ExperimentTable("demo", ["n", "count"])
    table.add_row(n=1, count=3)
    path = tmp_path / "demo.csv"
    table.write(str(path))
    assert read_table(str(path)).column("count") == [3]


def test_cells():
    assert format_cell(None) == ""
    assert format_cell(1 / 3) == "0.333333333333"
    assert parse_cell("7/2") == F(7, 2)
    assert parse_cell("plain") == "plain"


def test_preimage_growth_of_horseshoe(horseshoe):
    table = theorem1_experiment(horseshoe, F(1, 2), 8)
    assert table.column("count") == [3 ** n for n in range(9)]
    assert table.column("ratio") == [1.0] * 9
    assert table.meta("lam_source") == "constant slope"
    assert table.meta("transitivity") == "TransitiveLEO"
    assert table.meta("bounded") is True
    assert table.meta("truncated") is False


def test_preimage_growth_of_golden_map(golden, small_config):
    table = theorem1_experiment(golden, F(1, 3), 16, config=small_config)
    assert table.column("count")[:6] == [1, 2, 3, 5, 8, 13]
    assert table.meta("lam") == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-8)
    assert table.meta("bounded") is True


def test_preimage_growth_truncates(tent):
    table = theorem1_experiment(tent, F(1, 2), 10, budget=50)
    assert table.meta("truncated") is True
    assert len(table) < 11


def test_experiment_tables_are_reproducible(horseshoe):
    a = theorem1_experiment(horseshoe, F(1, 2), 6)
    b = theorem1_experiment(horseshoe, F(1, 2), 6)
    assert compare_tables(a, b) == {}
    c = theorem1_experiment(horseshoe, F(1, 2), 5)
    assert compare_tables(a, c) != {}


def test_solve_model_routes(horseshoe, golden, small_config):
    assert solve_model(horseshoe, small_config).notes["route"] == "constant-slope"
    assert solve_model(golden, small_config).notes["route"] == "markov"


def test_theorem2_on_unperturbed_family(small_config):
    table = theorem2_experiment(get_family("modality-preserving"), [0], [F(1, 5), F(1, 10), F(1, 20)], small_config)
    assert table.column("delta") == [0.2, 0.1, 0.05]
    assert table.column("argmin_t") == [0, 0, 0]
    assert table.meta("failed") == ""


def test_continuity_report():
    table = continuity_report(get_family("modality-preserving"), [F(1, 8), F(1, 16)])
    assert table.column("crit_displacement") == [0, 0]
    assert table.column("d_map") == [F(1, 8), F(1, 16)]
    assert table.column("modality") == [2, 2]
    assert table.column("fixed_point_displacement") == [None, None]


def test_example2_continuity_tracks_fixed_point():
    f = example2_map()
    assert len(fixed_points(f)) == 1
    table = continuity_report(get_family("example2"), [F(1, 2), F(1, 4)])
    assert table.column("fixed_point_displacement") == [0, 0]
    assert table.column("d_map") == [F(1, 144), F(1, 288)]


@pytest.mark.slow
def test_modality_preserving_models_converge(small_config):
    table = theorem3_experiment(get_family("modality-preserving"), [F(1, 8), F(1, 16), F(1, 32)], small_config)
    assert table.column("error") == [None, None, None]
    d_model = table.column("d_model")
    # d_model shrinks like 1.4 s: bounded by 2 s and roughly halving with s
    for t, d in zip(table.column("t"), d_model):
        assert d <= 2 * t
    for a, b in zip(d_model, d_model[1:]):
        assert 0.35 < b / a < 0.65
    d_psi = table.column("d_psi")
    assert d_psi[0] > d_psi[1] > d_psi[2]


@pytest.mark.slow
def test_example1_models_stay_away(small_config):
    gap = float(sup_distance(example1(0).g_tilde, horseshoe3()))
    table = theorem3_experiment(get_family("example1"), [F(1, 4), F(1, 8), F(1, 16)], small_config)
    assert table.column("error") == [None, None, None]
    for t, h, d_model in zip(table.column("t"), table.column("h"), table.column("d_model")):
        assert h == pytest.approx(math.log(3 + 2 * t), abs=1e-6)
        assert d_model > gap / 2
    d_map = table.column("d_map")
    assert d_map[2] < d_map[0]



def test_preimage_growth_of_tent(tent):
    table = theorem1_experiment(tent, F(1, 3), 12)
    assert table.column("count") == [2 ** n for n in range(13)]
    assert table.column("ratio") == [1.0] * 13
    assert table.meta("bounded") is True


@pytest.mark.slow
def test_preimage_growth_of_horseshoe_to_depth_12(horseshoe):
    table = theorem1_experiment(horseshoe, F(1, 2), 12)
    assert table.column("ratio") == [1.0] * 13
    assert table.meta("truncated") is False


@pytest.mark.slow
def test_preimage_growth_of_golden_map_to_depth_25(golden, small_config):
    phi = (1 + math.sqrt(5)) / 2
    table = theorem1_experiment(golden, F(1, 3), 25, config=small_config)
    assert table.meta("truncated") is False
    assert table.column("count")[-1] == 196418
    assert table.meta("trailing_min") > 0.1
    assert table.meta("bounded") is True
    assert table.column("ratio")[-1] == pytest.approx(phi ** 2 / math.sqrt(5), abs=1e-6)


@pytest.mark.slow
def test_theorem2_on_example1(small_config):
    eps_list = [F(1, 5), F(1, 10), F(1, 20)]
    table = theorem2_experiment(get_family("example1"), [F(1, 4), F(1, 8), F(1, 16), F(1, 32)], eps_list, small_config)
    assert table.meta("failed") == ""
    delta = table.column("delta")
    assert delta == pytest.approx([float(e) / 15 for e in eps_list], rel=0.05)
    assert delta[0] > delta[1] > delta[2] > 0
    for eps, d in zip(eps_list, delta):
        assert d < eps
