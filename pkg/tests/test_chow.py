from fractions import Fraction

import pytest

from chow import (
    LocalChowRings,
    cap,
    chow_mw_duality,
    chow_ring,
    degree,
    evaluate,
    gram_matrix,
    gysin,
    is_balanced,
    minkowski_weights,
    pairing,
    product,
    restriction,
    weights_by_cone,
)
from exact_la import RationalMatrix, rank, solve
from exceptions import DegreeMismatchException, NotUnimodularException
from fixtures import FIX_F, fix_a, fix_c, u34
from polyhedral import Fan, complex_from_json, fan_complex


@pytest.mark.parametrize("build, dims", [(fix_a, (1, 1)), (fix_c, (1, 4, 1)), (u34, (1, 7, 1))])
def test_chow_dims(build, dims):
    assert chow_ring(build()).dims == dims


def test_non_unimodular_fan():
    fan = Fan(2, [(1, 0), (1, 2)], [(), (0,), (1,), (0, 1)])
    with pytest.raises(NotUnimodularException):
        chow_ring(fan)


def test_degree_of_ray_class():
    ring = chow_ring(fix_a())
    for ray in range(3):
        assert degree(ring.monomial_class([ray])) == 1
    assert degree(ring.zero(1)) == 0


def test_degree_constant_on_maximal_cones():
    fan = fix_c()
    ring = chow_ring(fan)
    assert {degree(ring.monomial_class(c)) for c in fan.cones_of_dim(2)} == {1}


def test_degree_needs_top_degree():
    ring = chow_ring(fix_c())
    with pytest.raises(DegreeMismatchException):
        degree(ring.one())


def test_pairing_examples():
    ring = chow_ring(fix_a())
    assert pairing(ring.one(), ring.monomial_class([0])) == 1
    assert pairing(ring.one(), ring.zero(1)) == 0
    assert rank(gram_matrix(chow_ring(fix_c()), 1)) == 4


def test_non_cone_monomials_vanish():
    fan = fix_c()
    ring = chow_ring(fan)
    rays = range(len(fan.rays))
    for a in rays:
        for b in rays:
            if a != b and not fan.is_cone([a, b]):
                assert ring.monomial_class([a, b]).is_zero()


def test_minkowski_weights_examples():
    weights = minkowski_weights(fix_a(), 1)
    assert len(weights) == 1
    assert len(set(weights[0].weights)) == 1
    assert len(minkowski_weights(fix_a(), 0)) == 1
    assert len(minkowski_weights(fix_c(), 1)) == 4


def test_cap_is_balanced():
    fan = fix_c()
    x = fan_complex(fan)
    ring = chow_ring(fan)
    for alpha in ring.basis_classes(1):
        assert is_balanced(x, cap(alpha, x))


@pytest.mark.parametrize("build", [fix_a, fix_c, u34])
def test_chow_mw_duality_is_invertible(build):
    fan = build()
    ring = chow_ring(fan)
    for p in range(ring.dim + 1):
        matrix = chow_mw_duality(fan, p)
        assert matrix.rows == matrix.cols == ring.dim_of(p)
        assert rank(matrix) == matrix.rows


def test_chow_mw_duality_of_u23_in_degree_one():
    matrix = chow_mw_duality(fix_a(), 1)
    assert (matrix.rows, matrix.cols) == (1, 1)
    assert matrix.get(0, 0) != 0



def test_chow_mw_duality_columns_are_cap_products():
    fan = fix_c()
    ring = chow_ring(fan)
    x = fan_complex(fan)
    weights = minkowski_weights(x, 1)
    matrix = chow_mw_duality(fan, 1)
    for j, alpha in enumerate(ring.basis_classes(1)):
        image = cap(alpha, x)
        for position, face in enumerate(weights[0].faces):
            combined = sum(matrix.get(i, j) * w.weights[position] for i, w in enumerate(weights))
            assert combined == image.weight(face)


def test_evaluation_ignores_linear_relations():
    fan = fix_c()
    x = fan_complex(fan)
    ring = chow_ring(fan)
    for w in minkowski_weights(x, 1):
        by_cone = weights_by_cone(x, w)
        for ray in range(len(fan.rays)):
            # x_ρ и его редукция по базису дают одно значение
            direct = w.weight(x.find((0,), (ray,)).index)
            assert evaluate(ring.monomial_class([ray]), by_cone) == direct


def _origin_and_rays(fan):
    x = fan_complex(fan)
    local = LocalChowRings(x)
    origin = x.find((0,))
    rays = [x.find((0,), (r,)) for r in range(len(fan.rays))]
    return local, origin, rays


def test_gysin_of_unit_is_ray_class():
    local, origin, rays = _origin_and_rays(fix_a())
    ring = local.ring(origin.index)
    for delta in rays:
        rho = local.distinguished_ray(origin, delta)
        image = gysin(local, origin, delta, local.ring(delta.index).one())
        assert image.coefficients == ring.monomial_class([rho]).coefficients
        assert degree(image) == 1


def test_restriction_of_unit():
    local, origin, rays = _origin_and_rays(fix_c())
    image = restriction(local, origin, rays[0], local.ring(origin.index).one())
    assert image.coefficients == (1,)


def test_restriction_to_zero_dimensional_star_vanishes():
    y = complex_from_json({"lattice_rank": 1, "vertices": [[0], [1]], "rays": [[1], [-1]],
                           "faces": [{"vertices": [0, 1]}, {"vertices": [1], "rays": [0]},
                                     {"vertices": [0], "rays": [1]}]})
    local = LocalChowRings(y)
    vertex = y.find((0,))
    edge = y.find((0, 1))
    ring = local.ring(vertex.index)
    image = restriction(local, vertex, edge, ring.basis_class(1, 0))
    assert image.is_zero()


def test_restriction_independent_of_functional():
    local, origin, rays = _origin_and_rays(fix_c())
    ring = local.ring(origin.index)
    for delta in rays:
        rho = local.distinguished_ray(origin, delta)
        e = local.star(origin.index).fan.rays[rho]
        first = solve(RationalMatrix.from_rows([list(e)]), [1])
        second = [first[0] - e[1], first[1] + e[0]]
        for alpha in ring.basis_classes(1):
            assert (restriction(local, origin, delta, alpha, first).coefficients
                    == restriction(local, origin, delta, alpha, second).coefficients)


def test_restriction_is_multiplicative():
    local, origin, rays = _origin_and_rays(fix_c())
    ring = local.ring(origin.index)
    unit = ring.one()
    for delta in rays:
        for alpha in ring.basis_classes(1):
            left = restriction(local, origin, delta, product(unit, alpha))
            right = product(restriction(local, origin, delta, unit), restriction(local, origin, delta, alpha))
            assert left.coefficients == right.coefficients


def test_projection_formula_on_permutohedral_stars():
    local, origin, rays = _origin_and_rays(fix_c())
    ring = local.ring(origin.index)
    for delta in rays:
        star_ring = local.ring(delta.index)
        for p in range(star_ring.dim + 1):
            for a in star_ring.basis_classes(p):
                for b in ring.basis_classes(ring.dim - p - 1):
                    left = degree(product(gysin(local, origin, delta, a), b))
                    right = degree(product(a, restriction(local, origin, delta, b)))
                    assert left == right


def test_restriction_in_product_complex():
    y = complex_from_json(FIX_F)
    local = LocalChowRings(y)
    vertex = y.find((0,))
    ring = local.ring(vertex.index)
    assert ring.dims == (1, 2, 1)
    for r in range(4):
        edge = y.find((0,), (r,))
        for alpha in ring.basis_classes(1):
            image = restriction(local, vertex, edge, alpha)
            assert image.degree == 1
            assert all(isinstance(c, Fraction) for c in image.coefficients)
