import pytest

from chow import chow_ring
from fixtures import fix_c
from trop_cohomology import (
    cellular_complex,
    check_poincare_duality,
    coefficient_space,
    euler_check,
    fundamental_class,
    hodge_diamond,
    permutation_sign,
    poincare_pairing,
    tropical_cohomology,
    wedge,
)

LINE = {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 1}
SURFACE = {(p, q): 0 for p in range(3) for q in range(3)}
SURFACE.update({(0, 0): 1, (1, 1): 2, (2, 2): 1})


def test_wedge_and_permutation_sign():
    assert wedge([(1, 0), (0, 1)], 2) == (1,)
    assert wedge([(0, 1), (1, 0)], 2) == (-1,)
    assert wedge([], 3) == (1,)
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1


@pytest.mark.parametrize("name", ["fixA", "fixB", "fixD", "fixE"])
def test_projective_line_diamond(compact, name):
    assert hodge_diamond(compact(name)) == LINE


@pytest.mark.parametrize("name", ["fixF", "strip"])
def test_product_of_lines_diamond(compact, name):
    assert hodge_diamond(compact(name)) == SURFACE


def test_permutohedral_diamond_matches_chow(compact):
    diamond = hodge_diamond(compact("fixC"))
    dims = chow_ring(fix_c()).dims
    for p in range(3):
        for q in range(3):
            assert diamond[(p, q)] == (dims[p] if p == q else 0)


def test_coefficient_spaces(compact):
    x = compact("fixA")
    origin = x.find((0,))
    assert coefficient_space(x, origin, 0).dim == 1
    assert coefficient_space(x, origin, 1).dim == 2
    line = compact("fixD")
    infinity = line.find((0,), (0,), (0,))
    assert coefficient_space(line, infinity, 0).dim == 1
    # страта точки на бесконечности нульмерна
    assert coefficient_space(line, infinity, 1).dim == 0


@pytest.mark.parametrize("name", ["fixD", "fixE", "fixF", "fixC"])
def test_cochain_complexes_square_to_zero(compact, name):
    x = compact(name)
    for p in range(x.dim + 1):
        cc = cellular_complex(x, p)
        assert cc.cochains.squares_to_zero()
        assert euler_check(cc)


def test_cohomology_by_row(compact):
    assert tropical_cohomology(compact("fixF"), 1) == [0, 2, 0]


def test_fundamental_class_is_a_nonzero_cycle(compact):
    for name in ("fixD", "fixF"):
        assert any(fundamental_class(compact(name)))


def test_poincare_pairing_on_the_line(compact):
    matrix = poincare_pairing(compact("fixD"), 0, 0)
    assert (matrix.rows, matrix.cols) == (1, 1)
    assert matrix.get(0, 0) != 0


@pytest.mark.parametrize("name", ["fixD", "fixF"])
def test_poincare_duality(compact, name):
    assert all(check_poincare_duality(compact(name)).values())


def test_poincare_pairing_of_permutohedral_middle_degree(compact):
    matrix = poincare_pairing(compact("fixC"), 1, 1)
    assert (matrix.rows, matrix.cols) == (4, 4)
