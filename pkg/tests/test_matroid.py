import pytest

from exceptions import MalformedInputException, NotSimpleException
from matroid import Matroid, bergman_fan, flats, matroid_from_json


def test_flats_of_uniform_rank_two():
    assert flats(Matroid.uniform(3, 2)).proper_flats() == [frozenset({0}), frozenset({1}), frozenset({2})]


def test_flats_of_boolean():
    proper = flats(Matroid.boolean(3)).proper_flats()
    assert sorted(len(f) for f in proper) == [1, 1, 1, 2, 2, 2]


def test_rank_one_has_no_proper_flats():
    assert flats(Matroid.uniform(1, 1)).proper_flats() == []


def test_bergman_fan_of_u23():
    fan = bergman_fan(Matroid.uniform(3, 2))
    assert fan.rays == ((1, 0), (0, 1), (-1, -1))
    assert fan.dim == 1
    assert fan.is_unimodular()


def test_bergman_fan_of_boolean_is_permutohedral():
    fan = bergman_fan(Matroid.boolean(3))
    assert len(fan.rays) == 6
    assert len(fan.cones_of_dim(2)) == 6
    assert fan.is_unimodular()


def test_bergman_fan_of_rank_one_is_zero_fan():
    fan = bergman_fan(Matroid.uniform(2, 1))
    assert fan.dim == 0
    assert fan.rays == ()


def test_bergman_fan_is_pure_of_dimension_rank_minus_one():
    m = Matroid.uniform(4, 3)
    fan = bergman_fan(m)
    assert fan.is_pure()
    assert fan.dim == m.rank() - 1
    # флаги длины 1 и 2 собственных флэтов U_{3,4}: 4 + 6 и 12
    assert len(fan.cones_of_dim(1)) == 10
    assert len(fan.cones_of_dim(2)) == 12


def test_graphic_triangle_is_u23():
    triangle = Matroid.graphic([[0, 1], [1, 2], [0, 2]])
    assert triangle.rank() == 2
    assert bergman_fan(triangle).rays == bergman_fan(Matroid.uniform(3, 2)).rays


def test_rank_axioms_hold_for_constructors():
    for m in (Matroid.uniform(4, 2), Matroid.boolean(3), Matroid.graphic([[0, 1], [1, 2], [2, 0], [2, 3]])):
        assert m.check_axioms()


def test_loop_is_not_simple():
    with pytest.raises(NotSimpleException):
        flats(Matroid.from_bases(2, [[0]]))


def test_matroid_from_json():
    assert matroid_from_json({"type": "uniform", "n": 3, "r": 2}).rank() == 2
    assert matroid_from_json({"type": "boolean", "n": 3}).rank() == 3
    assert matroid_from_json({"type": "bases", "ground": 3, "bases": [[0, 1], [0, 2], [1, 2]]}).rank() == 2


def test_matroid_from_json_rejects_unknown_type():
    with pytest.raises(MalformedInputException):
        matroid_from_json({"type": "vector"})


def test_bases_violating_exchange_are_rejected():
    # {0, 1} и {2, 3}: обмен из {0, 1} в {2, 3} невозможен
    with pytest.raises(MalformedInputException):
        matroid_from_json({"type": "bases", "ground": 4, "bases": [[0, 1], [2, 3]]})


def test_bases_of_a_matroid_pass_the_axiom_check():
    m = Matroid.from_bases(4, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3]])
    assert m.rank() == 2
    assert m.rank({2, 3}) == 1
