"""Сквозные проверки на всех фикстурах"""
import random

import pytest

from chow import chow_mw_duality, chow_ring, is_balanced, minkowski_weights
from clemens_schmid import (
    clemens_schmid_sequences,
    connecting_map,
    kernel_and_cokernel,
    mapping_cone_check,
    random_lefschetz_triple,
    tropical_clemens_schmid,
)
from exact_la import rank
from fixtures import fix_a, fix_c, fixture_json, u34
from hodge_cycles import (
    hodge_locus_basis,
    hodge_to_cycle,
    mw_pairing,
    numerical_vs_homological,
    steenbrink_mw_pairing,
    verify_class,
    zigzag_representative,
)
from polyhedral import compactify, fan_complex, fan_from_json
from steenbrink import check_psi_identities, commutes_with_monodromy, squares_to_zero, verify_hl
from trop_cohomology import cellular_complex, hodge_diamond

PAGES = ["fixA", "fixC", "fixD", "fixE", "fixF"]


def _fans():
    return {
        "fixA": fix_a(),
        "fixB": fan_from_json(fixture_json("fixB")),
        "fixC": fix_c(),
        "u34": u34(),
    }


@pytest.mark.parametrize("fan, expected", [(fix_a, (1, 1)), (fix_c, (1, 4, 1)), (u34, (1, 7, 1))])
def test_local_hodge_isomorphism(fan, expected):
    f = fan()
    ring = chow_ring(f)
    assert tuple(ring.dim_of(p) for p in range(ring.dim + 1)) == expected
    diamond = hodge_diamond(compactify(fan_complex(f)))
    for (p, q), h in diamond.items():
        assert h == (expected[p] if p == q else 0)


@pytest.mark.parametrize("name", ["fixA", "fixB", "fixC", "u34"])
def test_chow_minkowski_duality(name):
    f = _fans()[name]
    for p in range(chow_ring(f).dim + 1):
        matrix = chow_mw_duality(f, p)
        assert matrix.rows == matrix.cols
        assert rank(matrix) == matrix.rows


@pytest.mark.parametrize("name", PAGES)
def test_steenbrink_comparison(compact, page, name):
    diamond = hodge_diamond(compact(name))
    st = page(name)
    for (p, q), h in diamond.items():
        assert st.cohomology(q - p, 2 * p).dim == h


def test_triangulation_does_not_change_ranks(compact):
    assert hodge_diamond(compact("fixD")) == hodge_diamond(compact("fixE"))


@pytest.mark.parametrize("name", PAGES)
def test_structural_identities(page, name):
    st = page(name)
    assert squares_to_zero(st)
    assert commutes_with_monodromy(st)
    assert check_psi_identities(st, random.Random(name), 100).ok


@pytest.mark.parametrize("name", PAGES)
def test_hard_lefschetz(page, name):
    report = verify_hl(page(name))
    assert all(report.page.values())
    assert all(report.cohomology.values())


def test_abstract_clemens_schmid():
    rng = random.Random(2024)
    for _ in range(200):
        t = random_lefschetz_triple(rng)
        assert clemens_schmid_sequences(t).ok
        kc = kernel_and_cokernel(t)
        lift = [[rng.randint(-5, 5) for _ in range(t.c.dim(-2))] for _ in range(kc.r.cohomology(0).dim)]
        assert connecting_map(t, kc).to_rows() == connecting_map(t, kc, lift).to_rows()


@pytest.mark.parametrize("name", ["fixD", "fixE", "fixF"])
def test_tropical_clemens_schmid(page, name):
    assert tropical_clemens_schmid(page(name)).ok


@pytest.mark.parametrize("name", ["fixD", "fixE"])
@pytest.mark.parametrize("b", [0, 2])
def test_mapping_cone(page, name, b):
    assert mapping_cone_check(page(name), b).ok


@pytest.mark.parametrize("name, p", [("fixD", 1), ("fixF", 1), ("fixC", 1)])
def test_hodge_round_trip(page, name, p):
    st = page(name)
    basis = hodge_locus_basis(st, p)
    assert basis
    for alpha in basis:
        cyc = hodge_to_cycle(st, alpha)
        assert is_balanced(st.complex, cyc.weight)
        assert verify_class(st, alpha, cyc)


@pytest.mark.parametrize("name", PAGES)
def test_numerical_equals_homological(page, name):
    st = page(name)
    for p in range(st.dim + 1):
        report = numerical_vs_homological(st, p)
        assert report.ok
        assert report.orthogonal


@pytest.mark.parametrize("name", ["fixD", "fixF"])
def test_zigzag_consistency(page, name):
    st = page(name)
    x = st.complex
    for p in range(st.dim + 1):
        cc = cellular_complex(x, p)
        weights = minkowski_weights(x, p)
        for alpha in hodge_locus_basis(st, p):
            cochain = zigzag_representative(st, alpha, cc)
            assert all(mw_pairing(cc, cochain, w) == steenbrink_mw_pairing(st, alpha, w) for w in weights)
