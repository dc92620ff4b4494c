import logging
import random
from fractions import Fraction
from typing import Optional, Sequence

from attrs import field, frozen
from sortedcontainers import SortedDict

from chow import ChowClass, LocalChowRings, degree, gysin, pairing, product, restriction
from exact_la import (
    Cohomology,
    GradedComplex,
    RationalMatrix,
    induced_map,
    kernel_basis,
    rank,
    to_vector,
    zero_vector,
)
from exceptions import DegeneratePairingException, HLFailureException, NotBergmanException
from polyhedral import FaceComplex, Fan, sign

logger = logging.getLogger(__name__)


def epsilon(a: int, b: int) -> int:
    return -1 if (a + b // 2) % 2 else 1


def is_connected_in_codim_one(fan: Fan) -> bool:
    maximal = fan.maximal_cones()
    if len(maximal) <= 1:
        return True
    reached = {0}
    frontier = [0]
    while frontier:
        current = frontier.pop()
        for other, cone in enumerate(maximal):
            if other not in reached and len(maximal[current] & cone) == fan.dim - 1:
                reached.add(other)
                frontier.append(other)
    return len(reached) == len(maximal)


@frozen(hash=False)
class PageElement:
    a: int
    b: int
    coefficients: tuple = field(converter=to_vector)

    def is_zero(self) -> bool:
        return not any(self.coefficients)


@frozen(hash=False)
class SteenbrinkPage:
    """
    Первая страница ST_1^{a,b} = ⊕_s ⊕_{delta ∈ X_f, |delta| = s} A^{(a+b-s)/2}(Σ^delta).
    Базис строки (a, b) - метки (s, индекс грани, номер базисного класса Чжоу).
    """
    complex: FaceComplex
    local: LocalChowRings = field(eq=False, repr=False)
    finite: tuple
    dim: int
    rows: dict
    positions: dict
    restriction_maps: dict
    gysin_maps: dict
    monodromy: dict
    _cache: dict = field(factory=dict, eq=False, repr=False)

    def row_dim(self, a: int, b: int) -> int:
        return len(self.rows.get((a, b), ()))

    def labels(self, a: int, b: int) -> tuple:
        return self.rows.get((a, b), ())

    def block_indices(self, a: int, b: int, s: int) -> list[int]:
        return [i for i, label in enumerate(self.labels(a, b)) if label[0] == s]

    def block_dim(self, a: int, b: int, s: int) -> int:
        return len(self.block_indices(a, b, s))

    def block_dims(self) -> SortedDict:
        dims = SortedDict()
        for (a, b), labels in self.rows.items():
            for s, _, _ in labels:
                dims[(a, b, s)] = dims.get((a, b, s), 0) + 1
        return dims

    def chow_degree(self, a: int, b: int, s: int) -> int:
        return (a + b - s) // 2

    def _zeros(self, source: tuple, target: tuple) -> RationalMatrix:
        return RationalMatrix.zeros(self.row_dim(*target), self.row_dim(*source))

    def differential(self, a: int, b: int) -> RationalMatrix:
        if (a, b) not in self.restriction_maps:
            return self._zeros((a, b), (a + 1, b))
        return self.restriction_maps[(a, b)] + self.gysin_maps[(a, b)]

    def n_matrix(self, a: int, b: int) -> RationalMatrix:
        return self.monodromy.get((a, b)) or self._zeros((a, b), (a + 2, b - 2))

    def n_power(self, a: int, b: int, k: int) -> RationalMatrix:
        result = RationalMatrix.identity(self.row_dim(a, b))
        for step in range(k):
            result = self.n_matrix(a + 2 * step, b - 2 * step) @ result
        return result

    def row_complex(self, b: int) -> GradedComplex:
        key = ("row", b)
        if key not in self._cache:
            degrees = range(-self.dim - 1, self.dim + 2)
            dims = {a: self.row_dim(a, b) for a in degrees}
            differentials = {a: self.differential(a, b) for a in degrees if dims[a] and self.row_dim(a + 1, b)}
            self._cache[key] = GradedComplex(dims, differentials)
        return self._cache[key]

    def cohomology(self, a: int, b: int) -> Cohomology:
        key = ("cohomology", a, b)
        if key not in self._cache:
            self._cache[key] = self.row_complex(b).cohomology(a)
        return self._cache[key]

    def element(self, a: int, b: int, values: Optional[Sequence] = None) -> PageElement:
        if values is None:
            values = zero_vector(self.row_dim(a, b))
        if len(values) != self.row_dim(a, b):
            raise ValueError(f"Element of ST^{a},{b} needs {self.row_dim(a, b)} coefficients")
        return PageElement(a, b, values)

    def apply_d(self, x: PageElement) -> PageElement:
        return PageElement(x.a + 1, x.b, self.differential(x.a, x.b).apply(x.coefficients))

    def apply_n(self, x: PageElement) -> PageElement:
        return PageElement(x.a + 2, x.b - 2, self.n_matrix(x.a, x.b).apply(x.coefficients))

    def face_classes(self, x: PageElement) -> dict:
        """Компоненты элемента: (s, грань) -> класс в A^k(Σ^delta)"""
        grouped: dict = {}
        for (s, index, i), value in zip(self.labels(x.a, x.b), x.coefficients):
            grouped.setdefault((s, index), {})[i] = value
        result = {}
        for (s, index), values in grouped.items():
            ring = self.local.ring(index)
            k = self.chow_degree(x.a, x.b, s)
            result[(s, index)] = ChowClass(ring, k, [values.get(i, 0) for i in range(ring.dim_of(k))])
        return result


def _check_star_fans(local: LocalChowRings, finite: Sequence[int]) -> None:
    for index in finite:
        fan = local.star(index).fan
        if not fan.is_pure() or not is_connected_in_codim_one(fan):
            raise NotBergmanException(f"Star fan of face {index} is not pure and connected in codimension one")


def build_steenbrink(x: FaceComplex) -> SteenbrinkPage:
    local = LocalChowRings(x)
    finite = tuple(f.index for f in x.faces if f.is_finite)
    d = max((x.faces[i].dim + local.ring(i).dim for i in finite), default=x.dim)
    _check_star_fans(local, finite)

    rows = {}
    for b in range(0, 2 * d + 1, 2):
        for a in range(-d, d + 1):
            labels = []
            for s in range(abs(a), d + 1, 2):
                k = (a + b - s) // 2
                for index in finite:
                    if x.faces[index].dim != s:
                        continue
                    ring = local.ring(index)
                    if 0 <= k <= ring.dim:
                        labels += [(s, index, i) for i in range(ring.dim_of(k))]
            if labels:
                rows[(a, b)] = tuple(labels)
    positions = {key: {label: i for i, label in enumerate(labels)} for key, labels in rows.items()}

    restriction_maps, gysin_maps, monodromy = {}, {}, {}
    for (a, b), labels in rows.items():
        target = positions.get((a + 1, b), {})
        restricted, pushed = {}, {}
        for column, (s, index, i) in enumerate(labels):
            face = x.faces[index]
            alpha = local.ring(index).basis_class((a + b - s) // 2, i)
            for up in x.cofacets[index]:
                eta = x.faces[up]
                if not eta.is_finite:
                    continue
                incidence = sign(x, face, eta)
                for j, value in enumerate(restriction(local, face, eta, alpha).coefficients):
                    if value:
                        restricted[(target[(s + 1, up, j)], column)] = incidence * value
            if s - 1 < abs(a + 1):
                continue
            for down in x.facets[index]:
                gamma = x.faces[down]
                incidence = sign(x, gamma, face)
                for j, value in enumerate(gysin(local, gamma, face, alpha).coefficients):
                    if value:
                        pushed[(target[(s - 1, down, j)], column)] = incidence * value
        if target:
            restriction_maps[(a, b)] = RationalMatrix(len(target), len(labels), restricted)
            gysin_maps[(a, b)] = RationalMatrix(len(target), len(labels), pushed)
        shifted = positions.get((a + 2, b - 2))
        if shifted:
            entries = {(shifted[label], column): 1 for column, label in enumerate(labels) if label in shifted}
            monodromy[(a, b)] = RationalMatrix(len(shifted), len(labels), entries)

    page = SteenbrinkPage(
        complex=x,
        local=local,
        finite=finite,
        dim=d,
        rows=rows,
        positions=positions,
        restriction_maps=restriction_maps,
        gysin_maps=gysin_maps,
        monodromy=monodromy,
    )
    logger.info(f"Steenbrink page: {len(finite)} finite faces, {len(page.block_dims())} nonzero blocks")
    return page


def squares_to_zero(st: SteenbrinkPage) -> bool:
    return all(
        (st.differential(a + 1, b) @ st.differential(a, b)).is_zero() for (a, b) in st.rows
    )


def commutes_with_monodromy(st: SteenbrinkPage) -> bool:
    for (a, b) in st.rows:
        left = st.differential(a + 2, b - 2) @ st.n_matrix(a, b)
        right = st.n_matrix(a + 1, b) @ st.differential(a, b)
        if not (left - right).is_zero():
            return False
    return True


def steenbrink_cohomology(st: SteenbrinkPage, b: int) -> dict:
    if b % 2:
        return {}
    return {a: st.cohomology(a, b).dim for a in range(-st.dim, st.dim + 1)}


def psi_matrix(st: SteenbrinkPage, a: int, b: int) -> RationalMatrix:
    """Матрица ψ на ST^{a,b} x ST^{-a,2d-b}"""
    key = ("psi", a, b)
    if key in st._cache:
        return st._cache[key]
    left = st.labels(a, b)
    right_positions = st.positions.get((-a, 2 * st.dim - b), {})
    sign_ab = epsilon(a, b)
    entries = {}
    for row, (s, index, i) in enumerate(left):
        ring = st.local.ring(index)
        k = st.chow_degree(a, b, s)
        x = ring.basis_class(k, i)
        k_dual = st.chow_degree(-a, 2 * st.dim - b, s)
        for j in range(ring.dim_of(k_dual)):
            column = right_positions.get((s, index, j))
            if column is None:
                continue
            value = pairing(x, ring.basis_class(k_dual, j))
            if value:
                entries[(row, column)] = sign_ab * value
    matrix = RationalMatrix(len(left), len(right_positions), entries)
    st._cache[key] = matrix
    return matrix


def psi_via_matrix(st: SteenbrinkPage, x: PageElement, y: PageElement) -> Fraction:
    if x.a + y.a != 0 or x.b + y.b != 2 * st.dim:
        return Fraction(0)
    if not x.coefficients or not y.coefficients:
        return Fraction(0)
    image = psi_matrix(st, x.a, x.b).apply(y.coefficients)
    return sum((c * v for c, v in zip(x.coefficients, image)), Fraction(0))


def psi(st: SteenbrinkPage, x: PageElement, y: PageElement) -> Fraction:
    """ψ(x, y) = ε(a,b) Σ_delta deg(x_delta y_delta)"""
    if x.a + y.a != 0 or x.b + y.b != 2 * st.dim:
        return Fraction(0)
    total = Fraction(0)
    right = st.face_classes(y)
    for key, cx in st.face_classes(x).items():
        if key in right and cx.degree + right[key].degree == cx.ring.dim:
            total += degree(product(cx, right[key]))
    return epsilon(x.a, x.b) * total


@frozen
class PsiIdentityReport:
    checked: int
    failures: dict

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())


def _random_element(st: SteenbrinkPage, rng: random.Random, a: int, b: int) -> PageElement:
    return st.element(a, b, [rng.randint(-3, 3) for _ in range(st.row_dim(a, b))])


def check_psi_identities(st: SteenbrinkPage, rng: random.Random, n: int = 100) -> PsiIdentityReport:
    """
    На случайных однородных парах: ψ(x,y) = (-1)^d ψ(y,x), ψ(Nx,y) + ψ(x,Ny) = 0,
    ψ(dx,y) + ψ(x,dy) = 0
    """
    failures = {"symmetry": 0, "monodromy": 0, "differential": 0}
    rows = sorted(st.rows)
    if not rows:
        return PsiIdentityReport(0, failures)
    d = st.dim
    for _ in range(n):
        a, b = rng.choice(rows)
        x = _random_element(st, rng, a, b)
        y = _random_element(st, rng, -a, 2 * d - b)
        if psi(st, x, y) != (-1) ** d * psi(st, y, x):
            failures["symmetry"] += 1
        y = _random_element(st, rng, -a - 2, 2 * d - b + 2)
        if psi(st, st.apply_n(x), y) + psi(st, x, st.apply_n(y)) != 0:
            failures["monodromy"] += 1
        y = _random_element(st, rng, -a - 1, 2 * d - b)
        if psi(st, st.apply_d(x), y) + psi(st, x, st.apply_d(y)) != 0:
            failures["differential"] += 1
    if any(failures.values()):
        logger.warning(f"ψ identities failed: {failures}")
    return PsiIdentityReport(n, failures)


def monodromy_on_cohomology(st: SteenbrinkPage, a: int, b: int, k: int = 1) -> RationalMatrix:
    """N^k: H^a(ST^{•,b}) -> H^{a+2k}(ST^{•,b-2k})"""
    return induced_map(st.n_power(a, b, k), st.cohomology(a, b), st.cohomology(a + 2 * k, b - 2 * k))


@frozen
class HLReport:
    page: dict
    cohomology: dict

    @property
    def ok(self) -> bool:
        return all(self.page.values()) and all(self.cohomology.values())


def _is_iso(matrix: RationalMatrix) -> bool:
    return matrix.rows == matrix.cols and rank(matrix) == matrix.rows


def verify_hl(st: SteenbrinkPage) -> HLReport:
    page, cohomology = {}, {}
    d = st.dim
    for k in range(d + 1):
        for b in range(0, 2 * d + 2 * k + 1, 2):
            if not st.row_dim(-k, b) and not st.row_dim(k, b - 2 * k):
                continue
            page[(k, b)] = _is_iso(st.n_power(-k, b, k))
            cohomology[(k, b)] = _is_iso(monodromy_on_cohomology(st, -k, b, k))
    report = HLReport(page, cohomology)
    if not report.ok:
        logger.warning(f"Hard Lefschetz fails: page {page}, cohomology {cohomology}")
    return report


def _block_restriction(st: SteenbrinkPage, a: int, b: int, source_s: int, target_s: int,
                       maps: dict) -> RationalMatrix:
    columns = st.block_indices(a, b, source_s)
    rows = st.block_indices(a + 1, b, target_s)
    matrix = maps.get((a, b))
    if matrix is None:
        return RationalMatrix.zeros(len(rows), len(columns))
    return matrix.submatrix(rows, columns)


def kernel_complex(st: SteenbrinkPage, b: int) -> GradedComplex:
    """K^{a,b} = ST^{a,b,a} с дифференциалом i*"""
    dims = {a: st.block_dim(a, b, a) for a in range(0, st.dim + 1)}
    differentials = {a: _block_restriction(st, a, b, a, a + 1, st.restriction_maps)
                     for a in range(0, st.dim) if dims[a] and dims.get(a + 1)}
    return GradedComplex(dims, differentials)


def cokernel_complex(st: SteenbrinkPage, b: int) -> GradedComplex:
    """R^{a,b} = ST^{a,b,-a} с дифференциалом Gys"""
    dims = {a: st.block_dim(a, b, -a) for a in range(-st.dim, 1)}
    differentials = {a: _block_restriction(st, a, b, -a, -a - 1, st.gysin_maps)
                     for a in range(-st.dim, 0) if dims[a] and dims.get(a + 1)}
    return GradedComplex(dims, differentials)


def kernel_inclusion(st: SteenbrinkPage, a: int, b: int) -> RationalMatrix:
    indices = st.block_indices(a, b, a)
    return RationalMatrix(st.row_dim(a, b), len(indices), {(row, j): 1 for j, row in enumerate(indices)})


def cokernel_projection(st: SteenbrinkPage, a: int, b: int) -> RationalMatrix:
    indices = st.block_indices(a, b, -a)
    return RationalMatrix(len(indices), st.row_dim(a, b), {(i, column): 1 for i, column in enumerate(indices)})


def kernel_cokernel_complexes(st: SteenbrinkPage, p: int) -> tuple[GradedComplex, GradedComplex]:
    return kernel_complex(st, 2 * p), cokernel_complex(st, 2 * p)


def surviving_relative(st: SteenbrinkPage, p: int, q: int) -> tuple[int, int]:
    k, r = kernel_cokernel_complexes(st, p)
    return k.cohomology(q - p).dim, r.cohomology(q - p).dim


def psi_pairing_on_cohomology(st: SteenbrinkPage, a: int, b: int) -> RationalMatrix:
    """
    ψ(x, N^a y) на H^{-a}(ST^{•,b}) x H^{-a}(ST^{•,2d-b+2a}), a >= 0
    """
    d = st.dim
    left = st.cohomology(-a, b).representatives
    right_b = 2 * d - b + 2 * a
    right = st.cohomology(-a, right_b).representatives
    power = st.n_power(-a, right_b, a)
    matrix = RationalMatrix.from_rows(
        [[psi_via_matrix(st, PageElement(-a, b, x), PageElement(a, right_b - 2 * a, power.apply(y))) for y in right]
         for x in left],
        len(right),
    )
    if not _is_iso(matrix):
        logger.warning(f"ψ pairing on H^{-a}(ST^{{•,{b}}}) is degenerate")
        raise DegeneratePairingException(f"ψ-pairing for a={a}, b={b} has rank {rank(matrix)}")
    return matrix


def _combine(representatives: Sequence, coordinates: Sequence) -> tuple:
    n = len(representatives[0]) if representatives else 0
    result = [Fraction(0)] * n
    for rep, c in zip(representatives, coordinates):
        if c:
            for i, value in enumerate(rep):
                result[i] += c * value
    return tuple(result)


def primitive_subspace(st: SteenbrinkPage, c: int, b: int) -> list[tuple]:
    """Коциклы-представители P^{-c,b} = ker N^{c+1} на H^{-c}(ST^{•,b})"""
    cohomology = st.cohomology(-c, b)
    if not cohomology.dim:
        return []
    induced = monodromy_on_cohomology(st, -c, b, c + 1)
    return [_combine(cohomology.representatives, v) for v in kernel_basis(induced).basis]


@frozen
class PrimitiveReport:
    dims: dict
    rank_identity: dict
    orthogonal: bool

    @property
    def ok(self) -> bool:
        return all(self.rank_identity.values()) and self.orthogonal


def primitive_parts(st: SteenbrinkPage) -> PrimitiveReport:
    """
    Разложение H^{-a}(ST^{•,b}) = ⊕_s N^s P^{-a-2s,b+2s}: размерности примитивных частей,
    проверка суммы рангов и ψ-ортогональности разных слагаемых
    """
    if not verify_hl(st).ok:
        raise HLFailureException("Primitive decomposition needs Hard Lefschetz on cohomology")
    d = st.dim
    b_values = range(0, 4 * d + 1, 2)
    dims = {}
    for c in range(d + 1):
        for b in b_values:
            if st.cohomology(-c, b).dim:
                dims[(c, b)] = len(primitive_subspace(st, c, b))
    rank_identity = {}
    for m in range(-d, d + 1):
        for b in b_values:
            total = st.cohomology(m, b).dim
            if not total:
                continue
            summed = sum(dims.get((2 * s - m, b + 2 * s), 0) for s in range(max(0, m), d + 1))
            rank_identity[(m, b)] = total == summed
    orthogonal = True
    for m in range(-d, 1):
        for b in b_values:
            partner_b = 2 * d - b - 2 * m
            for s in range(0, d + 1):
                for t in range(0, d + 1):
                    if s == t:
                        continue
                    first = primitive_subspace(st, 2 * s - m, b + 2 * s)
                    second = primitive_subspace(st, 2 * t - m, partner_b + 2 * t)
                    for u in first:
                        lifted = st.n_power(m - 2 * s, b + 2 * s, s).apply(u)
                        for v in second:
                            power = st.n_power(m - 2 * t, partner_b + 2 * t, t - m)
                            paired = PageElement(-m, 2 * d - b, power.apply(v))
                            if psi_via_matrix(st, PageElement(m, b, lifted), paired):
                                orthogonal = False
    return PrimitiveReport(dims, rank_identity, orthogonal)
