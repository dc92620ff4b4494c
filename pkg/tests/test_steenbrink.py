import random

import pytest

from exceptions import NotBergmanException
from polyhedral import Fan, compactify, complex_from_json
from steenbrink import (
    build_steenbrink,
    check_psi_identities,
    commutes_with_monodromy,
    epsilon,
    is_connected_in_codim_one,
    kernel_cokernel_complexes,
    primitive_parts,
    psi,
    psi_pairing_on_cohomology,
    psi_via_matrix,
    squares_to_zero,
    steenbrink_cohomology,
    surviving_relative,
    verify_hl,
)
from trop_cohomology import hodge_diamond

PAGES = ["fixD", "fixE", "fixF"]


def test_epsilon():
    assert epsilon(0, 0) == 1
    assert epsilon(0, 2) == -1
    assert epsilon(1, 2) == 1
    assert epsilon(-1, 0) == -1


def test_blocks_of_the_line(page):
    assert dict(page("fixD").block_dims()) == {(0, 0, 0): 1, (0, 2, 0): 1}


def test_blocks_of_the_subdivided_line(page):
    assert dict(page("fixE").block_dims()) == {(0, 0, 0): 2, (1, 0, 1): 1, (-1, 2, 1): 1, (0, 2, 0): 2}


@pytest.mark.parametrize("name", PAGES + ["fixA", "fixC"])
def test_differential_and_monodromy(page, name):
    st = page(name)
    assert squares_to_zero(st)
    assert commutes_with_monodromy(st)


def test_row_cohomology(page):
    assert steenbrink_cohomology(page("fixD"), 2) == {-1: 0, 0: 1, 1: 0}
    assert steenbrink_cohomology(page("fixD"), 1) == {}
    assert steenbrink_cohomology(page("fixF"), 2)[0] == 2


@pytest.mark.parametrize("name", PAGES)
def test_rows_match_tropical_cohomology(page, compact, name):
    st = page(name)
    diamond = hodge_diamond(compact(name))
    for (p, q), h in diamond.items():
        assert st.cohomology(q - p, 2 * p).dim == h


def test_psi_on_the_line(page):
    st = page("fixD")
    unit = st.element(0, 0, [1])
    ray = st.element(0, 2, [1])
    assert psi(st, unit, ray) == 1
    assert psi(st, unit, unit) == 0


def test_psi_matrix_agrees_with_blockwise_formula(page):
    rng = random.Random(3)
    for name in PAGES:
        st = page(name)
        for (a, b) in st.rows:
            if (-a, 2 * st.dim - b) not in st.rows:
                continue
            x = st.element(a, b, [rng.randint(-2, 2) for _ in range(st.row_dim(a, b))])
            y = st.element(-a, 2 * st.dim - b, [rng.randint(-2, 2) for _ in range(st.row_dim(-a, 2 * st.dim - b))])
            assert psi(st, x, y) == psi_via_matrix(st, x, y)


@pytest.mark.parametrize("name", PAGES)
def test_psi_identities(page, name):
    report = check_psi_identities(page(name), random.Random(2024), 100)
    assert report.checked == 100
    assert report.ok


@pytest.mark.parametrize("name", PAGES + ["fixA", "fixC"])
def test_hard_lefschetz(page, name):
    assert verify_hl(page(name)).ok


def test_page_level_hard_lefschetz_on_the_edge(page):
    report = verify_hl(page("fixE"))
    assert report.page[(1, 2)]
    assert report.cohomology[(1, 2)]


def test_kernel_and_cokernel_complexes(page):
    k, r = kernel_cokernel_complexes(page("fixD"), 1)
    assert k.dims.get(0) == 1
    assert r.dims.get(0) == 1
    assert all(n == 0 for a, n in k.dims.items() if a != 0)
    k, r = kernel_cokernel_complexes(page("fixE"), 1)
    assert k.dim(0) == 2
    assert k.dim(1) == 0
    assert r.dim(-1) == 1


def test_kernel_and_cokernel_ranges(page):
    st = page("fixE")
    for p in range(st.dim + 1):
        k, r = kernel_cokernel_complexes(st, p)
        assert all(a >= 0 for a, n in k.dims.items() if n)
        assert all(a <= 0 for a, n in r.dims.items() if n)


def test_surviving_and_relative(page):
    assert surviving_relative(page("fixD"), 1, 1) == (1, 1)
    assert surviving_relative(page("fixD"), 1, 0) == (0, 0)
    # H_s зависит от триангуляции, H^{p,q} - нет
    assert surviving_relative(page("fixE"), 1, 1) == (2, 1)
    assert surviving_relative(page("fixE"), 0, 0) == (1, 2)


def test_primitive_parts(page):
    line = primitive_parts(page("fixD"))
    assert line.ok
    assert line.dims[(0, 2)] == 1
    surface = primitive_parts(page("fixF"))
    assert surface.ok
    assert surface.dims[(0, 2)] == 2


def test_primitive_parts_with_monodromy(page):
    assert primitive_parts(page("fixE")).ok


@pytest.mark.parametrize("name", PAGES)
def test_psi_pairing_on_cohomology_is_nondegenerate(page, name):
    st = page(name)
    for b in range(0, 2 * st.dim + 1, 2):
        matrix = psi_pairing_on_cohomology(st, 0, b)
        assert matrix.rows == matrix.cols


def test_star_fans_must_be_connected_in_codimension_one():
    fan = Fan(2, [(1, 0), (0, 1), (-1, 0), (0, -1)], [(), (0,), (1,), (2,), (3,), (0, 1), (2, 3)])
    assert not is_connected_in_codim_one(fan)
    bowtie = complex_from_json({
        "lattice_rank": 2,
        "vertices": [[0, 0]],
        "rays": [[1, 0], [0, 1], [-1, 0], [0, -1]],
        "faces": [{"vertices": [0], "rays": [0, 1]}, {"vertices": [0], "rays": [2, 3]}],
    })
    with pytest.raises(NotBergmanException):
        build_steenbrink(compactify(bowtie))
