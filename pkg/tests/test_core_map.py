from fractions import Fraction as F

import numpy as np
import pytest

from plslope.core_map import (PLMap, RationalInterval, MapError, DomainError, NotMonotoneError, DiagonalSegmentError,
        BudgetExceeded, parse_rational, to_rational, connect_the_dots, compose, iterate, image_interval, preimage_point,
        preimage_counts, sup_distance, fixed_points, is_constant_slope, constant_slope_from_critical_values,
        match_critical_points, identity_map, eval_map, critical_data)
from plslope.lab.families import example1_values, modality_preserving


def test_parse_rational():
    assert parse_rational("1/3") == F(1, 3)
    assert parse_rational(" -2 ") == -2
    with pytest.raises(ValueError):
        parse_rational("0.5")
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(TypeError):
        to_rational(0.5)


def test_canonical_dots_drop_collinear():
    f = PLMap([(0, 0), (F(1, 4), F(1, 4)), (F(1, 2), F(1, 2)), (1, 0)])
    assert f.dots == ((0, 0), (F(1, 2), F(1, 2)), (1, 0))
    assert f == PLMap([(0, 0), (F(1, 2), F(1, 2)), (1, 0)])


def test_bad_dots_name_the_index():
    with pytest.raises(MapError) as err:
        PLMap([(0, 0), (F(1, 2), F(3, 2)), (1, 1)])
    assert err.value.index == 1
    with pytest.raises(MapError) as err:
        PLMap([(0, 0), (F(1, 2), 1), (F(1, 2), 0), (1, 1)])
    assert err.value.index == 2
    with pytest.raises(MapError):
        PLMap([(F(1, 4), 0), (1, 1)])


def test_connect_the_dots_rescales(example2):
    assert example2.scale == 72
    assert example2(F(24, 72)) == F(60, 72)
    assert example2(F(60, 72)) == F(24, 72)
    f = connect_the_dots([(0, 0), (36, 72), (72, 0)], domain=(0, 72))
    assert f == PLMap([(0, 0), (F(1, 2), 1), (1, 0)])


def test_critical_data(horseshoe, example2):
    assert horseshoe.critical.points == (0, F(1, 3), F(2, 3), 1)
    assert horseshoe.critical.directions == (1, -1, 1)
    assert horseshoe.modality == 2
    assert example2.critical.interior == tuple(F(c, 72) for c in (24, 25, 32, 58, 60))
    assert example2.modality == 5


def test_flat_piece_is_not_monotone():
    f = PLMap([(0, 0), (F(1, 3), F(1, 2)), (F(2, 3), F(1, 2)), (1, 1)])
    with pytest.raises(NotMonotoneError):
        f.critical


def test_evaluation(horseshoe):
    assert horseshoe(F(1, 3)) == 1
    assert horseshoe(F(1, 2)) == F(1, 2)
    assert horseshoe(F(1)) == 1
    with pytest.raises(DomainError):
        horseshoe(F(3, 2))


def test_compose_and_iterate(horseshoe, tent):
    h2 = compose(horseshoe, horseshoe)
    assert h2.lap_count == 9
    assert is_constant_slope(h2) == 9
    for x in (F(1, 7), F(2, 5), F(9, 10)):
        assert h2(x) == horseshoe(horseshoe(x))
    assert iterate(tent, 4).lap_count == 16


def test_iterate_budget(horseshoe):
    with pytest.raises(BudgetExceeded) as err:
        iterate(horseshoe, 3, lap_budget=10)
    assert err.value.attained == 2
    assert err.value.reached == 27
    assert err.value.partial.lap_count == 9


def test_image_interval(horseshoe, example2, identity):
    assert image_interval(horseshoe, RationalInterval.closed(0, F(1, 3))) == RationalInterval.unit()
    assert image_interval(horseshoe, RationalInterval.open(0, F(1, 3))) == RationalInterval.open(0, 1)
    assert image_interval(horseshoe, RationalInterval.closed(F(1, 4), F(1, 2))) == RationalInterval.closed(F(1, 2), 1)
    assert image_interval(example2, RationalInterval.closed(F(24, 72), F(25, 72))) == \
        RationalInterval.closed(F(58, 72), F(60, 72))
    half_open = RationalInterval(F(1, 4), F(1, 2), False, True)
    assert image_interval(identity, half_open) == half_open


def test_preimage_point(horseshoe, tent):
    assert preimage_point(horseshoe, 0) == (0, F(2, 3))
    assert preimage_point(horseshoe, 1) == (F(1, 3), 1)
    assert preimage_point(tent, F(1, 2)) == (F(1, 4), F(3, 4))
    with pytest.raises(DomainError):
        preimage_point(tent, F(3, 2))


def test_preimage_counts(horseshoe, tent, identity):
    assert preimage_counts(tent, F(1, 2), 6).counts == [2 ** k for k in range(7)]
    assert preimage_counts(horseshoe, F(1, 2), 5).counts == [3 ** k for k in range(6)]
    assert preimage_counts(identity, F(1, 3), 4).counts == [1] * 5


def test_preimage_counts_budget(tent):
    result = preimage_counts(tent, F(1, 2), 6, node_budget=10)
    assert result.truncated
    assert result.counts == [1, 2, 4]


def test_preimage_counts_agree_with_iterates(golden):
    counts = preimage_counts(golden, F(1, 3), 5).counts
    assert counts[:4] == [1, 2, 3, 5]
    for n in range(1, 6):
        assert counts[n] == len(preimage_point(iterate(golden, n), F(1, 3)))


def test_sup_distance(tent, identity, horseshoe):
    assert sup_distance(tent, identity) == 1
    assert sup_distance(horseshoe, horseshoe) == 0
    assert sup_distance(modality_preserving(F(1, 8)), horseshoe) == F(1, 8)


def test_fixed_points(horseshoe, tent, identity):
    assert fixed_points(horseshoe) == (0, F(1, 2), 1)
    assert fixed_points(tent) == (0, F(2, 3))
    with pytest.raises(DiagonalSegmentError) as err:
        fixed_points(identity)
    assert err.value.segment == (0, 1)


def test_constant_slope(horseshoe, example2):
    assert is_constant_slope(horseshoe) == 3
    assert is_constant_slope(example2) is None


def test_constant_slope_from_critical_values(horseshoe, tent):
    assert constant_slope_from_critical_values(3, [0, 1, 0, 1]) == horseshoe
    assert constant_slope_from_critical_values(2, [0, 1, 0]) == tent
    with pytest.raises(MapError):
        constant_slope_from_critical_values(2, [0, 1, 0, 1])
    with pytest.raises(MapError):
        constant_slope_from_critical_values(2, [0, F(1, 2), 1])


def test_example1_values_give_slope_three_plus_two_t():
    t = F(1, 4)
    values = example1_values(t)
    assert values == [F(1, 4), F(1, 8), F(5, 16), 0, F(13, 16), F(3, 16), 1, F(11, 16), F(7, 8), F(3, 4)]
    g = constant_slope_from_critical_values(3 + 2 * t, values)
    assert is_constant_slope(g) == F(7, 2)
    assert g.modality == 8


def test_inverse_composes_to_identity():
    psi = PLMap([(0, 0), (F(3, 8), F(1, 8)), (F(5, 8), F(7, 8)), (1, 1)])
    assert compose(psi, psi.inverse()) == identity_map()
    with pytest.raises(NotMonotoneError):
        PLMap([(0, 0), (F(1, 2), 1), (1, 0)]).inverse()


def test_match_critical_points(horseshoe, tent):
    pairs, displacement = match_critical_points(horseshoe, modality_preserving(F(1, 8)))
    assert displacement == 0
    assert len(pairs) == 2
    with pytest.raises(MapError):
        match_critical_points(horseshoe, tent)


def test_interval_algebra():
    a = RationalInterval.closed(0, F(1, 2))
    b = RationalInterval.open(F(1, 2), 1)
    assert a.intersect(b).is_empty()
    assert a.disjoint(b)
    assert a.hull(b) == RationalInterval(0, 1, False, True)
    assert RationalInterval.closed(0, F(1, 2)).interiors_disjoint(RationalInterval.closed(F(1, 2), 1))
    assert not RationalInterval.closed(0, F(1, 2)).disjoint(RationalInterval.closed(F(1, 2), 1))


def test_eval_map_and_critical_data(horseshoe, interchange):
    assert eval_map(horseshoe, "1/6") == F(1, 2)
    assert eval_map(horseshoe, 1) == 1
    with pytest.raises(DomainError):
        eval_map(horseshoe, F(3, 2))
    data = critical_data(horseshoe)
    assert data.points == (0, F(1, 3), F(2, 3), 1)
    assert data.interior == (F(1, 3), F(2, 3))
    assert data.directions == (1, -1, 1)
    assert data.modality == 2
    assert critical_data(interchange).directions == (1, -1, 1)


def random_map(rng, pieces, denominator=24):
    xs = sorted(int(v) for v in rng.choice(np.arange(1, denominator), size=pieces - 1, replace=False))
    ys = [int(rng.integers(0, denominator + 1))]
    for _ in range(pieces):
        y = int(rng.integers(0, denominator))
        ys.append(y if y < ys[-1] else y + 1)
    xs = [0] + xs + [denominator]
    return PLMap([(F(x, denominator), F(y, denominator)) for x, y in zip(xs, ys)])


def alternating_values(rng, count, denominator=8):
    while True:
        values = [F(int(v), denominator) for v in rng.integers(0, denominator + 1, size=count)]
        deltas = [b - a for a, b in zip(values, values[1:])]
        if all(d != 0 for d in deltas) and all(a * b < 0 for a, b in zip(deltas, deltas[1:])):
            return values


def test_composition_evaluates_pointwise():
    rng = np.random.default_rng(1)
    for _ in range(25):
        f, g = random_map(rng, 4), random_map(rng, 3)
        fg = compose(f, g)
        for x in [F(int(k), 97) for k in rng.integers(0, 98, size=10)] + list(g.xs):
            assert eval_map(fg, x) == f(g(x))
        assert fg.lap_count <= f.lap_count * g.lap_count
        assert iterate(f, 5).lap_count <= iterate(f, 2).lap_count * iterate(f, 3).lap_count


def test_sup_distance_is_a_metric():
    rng = np.random.default_rng(2)
    for _ in range(25):
        f, g, h = random_map(rng, 3), random_map(rng, 4), random_map(rng, 5)
        assert sup_distance(f, f) == 0
        assert sup_distance(f, g) == sup_distance(g, f)
        assert sup_distance(f, h) <= sup_distance(f, g) + sup_distance(g, h)


def test_image_interval_is_hull_of_attained_values():
    rng = np.random.default_rng(3)
    for _ in range(25):
        f = random_map(rng, 5)
        a, b = sorted(F(int(k), 60) for k in rng.choice(np.arange(61), size=2, replace=False))
        inside = [a, b] + [x for x in f.xs if a < x < b]
        values = [f(x) for x in inside]
        assert image_interval(f, RationalInterval.closed(a, b)) == RationalInterval.closed(min(values), max(values))


def test_critical_values_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(25):
        values = alternating_values(rng, int(rng.integers(2, 6)))
        lam = sum(abs(b - a) for a, b in zip(values, values[1:]))
        g = constant_slope_from_critical_values(lam, values)
        data = critical_data(g)
        assert len(data.points) == len(values)
        assert [g(c) for c in data.points] == values
        assert is_constant_slope(g) == lam
