import random
from fractions import Fraction

import pytest

from exact_la import (
    GradedComplex,
    RationalMatrix,
    Subspace,
    det,
    extends_to_lattice_basis,
    image_basis,
    induced_map,
    integer_kernel_basis,
    inverse,
    kernel_basis,
    quotient_dim,
    rank,
    solve,
)
from exceptions import NotASubspaceException


def test_rank_examples():
    assert rank(RationalMatrix.identity(2)) == 2
    assert rank(RationalMatrix.zeros(3, 4)) == 0
    assert rank(RationalMatrix.from_rows([[1, 2], [2, 4]])) == 1


def test_kernel_basis_examples():
    assert kernel_basis(RationalMatrix.identity(3)).dim == 0
    kernel = kernel_basis(RationalMatrix.from_rows([[1, 1, 1]]))
    assert kernel.dim == 2
    assert all(sum(v) == 0 for v in kernel.basis)
    assert kernel_basis(RationalMatrix.zeros(2, 3)).dim == 3


def test_solve_examples():
    assert solve(RationalMatrix.identity(3), [1, 2, 3]) == (1, 2, 3)
    assert solve(RationalMatrix.from_rows([[1, 1]]), [2]) == (2, 0)
    assert solve(RationalMatrix.from_rows([[0]]), [1]) is None


def test_quotient_dim():
    e = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    space = Subspace(3, e)
    assert quotient_dim(space, Subspace(3, [e[0]])) == 2
    assert quotient_dim(space, space) == 0
    assert quotient_dim(Subspace(2, [[1, 0], [0, 1]]), Subspace(2, [[1, 1]])) == 1


def test_quotient_dim_rejects_non_subspace():
    with pytest.raises(NotASubspaceException):
        quotient_dim(Subspace(2, [[1, 0]]), Subspace(2, [[0, 1]]))


def _random_matrix(rng, rows, cols):
    return RationalMatrix.from_rows(
        [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(cols)] for _ in range(rows)], cols
    )


def test_rank_nullity_and_exact_solutions():
    rng = random.Random(7)
    for _ in range(50):
        m = _random_matrix(rng, rng.randint(1, 5), rng.randint(1, 6))
        assert rank(m) + kernel_basis(m).dim == m.cols
        b = m.apply([rng.randint(-2, 2) for _ in range(m.cols)])
        x = solve(m, b)
        assert x is not None
        assert m.apply(x) == b


def test_rank_invariant_under_row_operations():
    rng = random.Random(11)
    for _ in range(30):
        m = _random_matrix(rng, 4, 5)
        rows = m.to_rows()
        rng.shuffle(rows)
        rows = [[value * rng.choice([1, 2, -3]) for value in row] for row in rows]
        assert rank(RationalMatrix.from_rows(rows, 5)) == rank(m)


def test_wide_sparse_matrix():
    m = RationalMatrix(2, 80, {(0, 0): 1, (0, 79): 1, (1, 40): 2})
    assert rank(m) == 2
    assert kernel_basis(m).dim == 78


def test_det_and_inverse():
    m = RationalMatrix.from_rows([[2, 1], [1, 1]])
    assert det(m) == 1
    assert (m @ inverse(m)).to_rows() == RationalMatrix.identity(2).to_rows()


def test_image_basis_spans_columns():
    m = RationalMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    image = image_basis(m)
    assert image.dim == 1
    assert image.contains([3, 6])


def test_integer_kernel_basis_is_a_lattice_basis():
    basis = integer_kernel_basis([[1, 2]], 2)
    assert len(basis) == 1
    assert basis[0] in ((-2, 1), (2, -1))


def test_integer_kernel_basis_is_saturated():
    # рациональное ядро 2x + 4y + z = 0 после сокращения знаменателей имеет индекс 2
    basis = integer_kernel_basis([[2, 4, 1]], 3)
    assert len(basis) == 2
    assert all(2 * x + 4 * y + z == 0 for x, y, z in basis)
    assert extends_to_lattice_basis(basis, 3)
    for target in ((1, 0, -2), (0, 1, -4)):
        coordinates = solve(RationalMatrix.from_columns(basis, 3), target)
        assert all(c.denominator == 1 for c in coordinates)


@pytest.mark.parametrize("vectors, n, expected", [
    ([(1, 0)], 2, True),
    ([(2, 0)], 2, False),
    ([(1, 1), (1, -1)], 2, False),
    ([(1, 2, 3)], 3, True),
    ([(1, 0), (2, 0)], 2, False),
    ([], 2, True),
])
def test_extends_to_lattice_basis(vectors, n, expected):
    assert extends_to_lattice_basis(vectors, n) is expected


def test_domain_matrix_conversion_keeps_entries():
    m = RationalMatrix.from_rows([[Fraction(1, 2), 0], [0, -3]])
    back = RationalMatrix.from_domain(m.to_domain())
    assert back.to_rows() == m.to_rows()
    assert back.to_rows()[0][0] == Fraction(1, 2)


def test_graded_complex_cohomology():
    # интервал: две вершины и ребро
    d0 = RationalMatrix.from_rows([[-1, 1]])
    c = GradedComplex({0: 2, 1: 1}, {0: d0})
    assert c.squares_to_zero()
    assert c.cohomology_dims() == {0: 1, 1: 0}
    h0 = c.cohomology(0)
    assert h0.dim == 1
    assert h0.is_coboundary([0, 0])
    assert not h0.is_coboundary(h0.representatives[0])


def test_induced_map_identity():
    c = GradedComplex({0: 2, 1: 1}, {0: RationalMatrix.from_rows([[-1, 1]])})
    h0 = c.cohomology(0)
    assert induced_map(RationalMatrix.identity(2), h0, h0).to_rows() == [[1]]


def test_matrix_rejects_out_of_range_entries():
    with pytest.raises(IndexError):
        RationalMatrix(1, 1, {(1, 0): 1})
