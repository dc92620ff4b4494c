import logging
import random
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from attrs import field, frozen
from sortedcontainers import SortedSet
from typing_extensions import Self

from chow import ChowClass, MinkowskiWeight, degree, evaluate, gysin, is_balanced, pairing, product
from exact_la import (
    RationalMatrix,
    Vector,
    image_basis,
    independent_subset,
    induced_map,
    kernel_basis,
    rank,
    solve,
    span_rank,
    to_vector,
    zero_vector,
)
from exceptions import (
    DegeneratePairingException,
    GluingConflictException,
    HLFailureException,
    IncompatibleClassException,
    MalformedInputException,
    ZigzagInconsistentException,
)
from polyhedral import Face, sign
from steenbrink import (
    PageElement,
    SteenbrinkPage,
    kernel_complex,
    kernel_inclusion,
    monodromy_on_cohomology,
    psi_via_matrix,
    verify_hl,
)
from trop_cohomology import CellularComplex, cellular_complex, multivector
from utils import format_rational, parse_rational

logger = logging.getLogger(__name__)


@frozen(hash=False)
class HodgeClass:
    """
    Коцикл K^{0,2p}: по классу alpha_v ∈ A^p(Σ^v) на каждой конечной вершине,
    координаты в базисе блока (0, 2p, s=0) страницы Стенбринка
    """
    p: int
    coefficients: tuple = field(converter=to_vector)

    def __add__(self, other: Self) -> Self:
        if other.p != self.p:
            raise IncompatibleClassException(f"Adding Hodge classes of degrees {self.p} and {other.p}")
        return HodgeClass(self.p, [a + b for a, b in zip(self.coefficients, other.coefficients)])

    def scale(self, factor) -> Self:
        factor = Fraction(factor)
        return HodgeClass(self.p, [c * factor for c in self.coefficients])

    def is_zero(self) -> bool:
        return not any(self.coefficients)


@frozen(hash=False)
class TropicalCycle:
    """Вес Минковского на (d-p)-гранях открытой части; цикл - замыкание носителя"""
    p: int
    weight: MinkowskiWeight

    @property
    def k(self) -> int:
        return self.weight.k

    def support(self) -> list[int]:
        return [index for index, value in zip(self.weight.faces, self.weight.weights) if value]

    def closure(self, st: SteenbrinkPage) -> SortedSet:
        faces = SortedSet()
        for index in self.support():
            faces.update(st.complex.subfaces(index))
        return faces


def hodge_class(st: SteenbrinkPage, p: int, values: Optional[Sequence] = None) -> HodgeClass:
    n = st.block_dim(0, 2 * p, 0)
    if values is None:
        values = zero_vector(n)
    if len(values) != n:
        raise IncompatibleClassException(f"K^{{0,{2 * p}}} has dimension {n}, got {len(values)} coefficients")
    return HodgeClass(p, values)


def _page_element(st: SteenbrinkPage, alpha: HodgeClass) -> PageElement:
    inclusion = kernel_inclusion(st, 0, 2 * alpha.p)
    return PageElement(0, 2 * alpha.p, inclusion.apply(alpha.coefficients))


def vertex_classes(st: SteenbrinkPage, alpha: HodgeClass) -> dict:
    """Вершина -> alpha_v"""
    classes = st.face_classes(_page_element(st, alpha))
    return {index: c for (s, index), c in classes.items() if s == 0}


def is_cocycle(st: SteenbrinkPage, alpha: HodgeClass) -> bool:
    k = kernel_complex(st, 2 * alpha.p)
    if not alpha.coefficients:
        return True
    return not any(k.differential(0).apply(alpha.coefficients))


def _check_cocycle(st: SteenbrinkPage, alpha: HodgeClass) -> None:
    if len(alpha.coefficients) != st.block_dim(0, 2 * alpha.p, 0):
        raise IncompatibleClassException(f"Class does not live in K^{{0,{2 * alpha.p}}}")
    if not is_cocycle(st, alpha):
        logger.warning(f"Class of degree {alpha.p} violates the edge compatibility")
        raise IncompatibleClassException("Restrictions of alpha_u and alpha_v to a common edge differ")


def _combination(vectors: Sequence[Sequence], coordinates: Sequence, n: int) -> Vector:
    result = [Fraction(0)] * n
    for vector, c in zip(vectors, coordinates):
        if c:
            for i, value in enumerate(vector):
                result[i] += c * value
    return tuple(result)


def hodge_locus_basis(st: SteenbrinkPage, p: int, check: bool = True) -> list[HodgeClass]:
    """
    Базис ker N ∩ H^{p,p}: коциклы K^{0,2p}, чьи образы в H^0(ST^{•,2p}) линейно независимы
    """
    if check and not verify_hl(st).ok:
        raise HLFailureException("Hodge locus needs Hard Lefschetz on the Steenbrink page")
    b = 2 * p
    k = kernel_complex(st, b)
    surviving = k.cohomology(0)
    if not surviving.dim:
        return []
    target = st.cohomology(0, b)
    inclusion = kernel_inclusion(st, 0, b)
    images = [target.coordinates(inclusion.apply(r)) for r in surviving.representatives]
    chosen = independent_subset(images, target.dim) if target.dim else []
    basis = [HodgeClass(p, surviving.representatives[i]) for i in chosen]
    logger.debug(f"Hodge locus in degree {p}: {len(basis)} classes out of H^0(K) of dim {surviving.dim}")
    return basis


def _vertex_face(st: SteenbrinkPage, vertex: int) -> int:
    return st.complex.lookup[((vertex,), (), frozenset())]


def _local_weight(st: SteenbrinkPage, alpha_v: ChowClass, vertex_index: int, eta: Face) -> Fraction:
    cone = st.local.star(vertex_index).cone_of(eta.index)
    return degree(product(alpha_v, alpha_v.ring.monomial_class(cone)))


def hodge_to_cycle(st: SteenbrinkPage, alpha: HodgeClass) -> TropicalCycle:
    """
    Склейка локальных весов Минковского: w(eta) = deg(alpha_v x_eta) в звёздном веере
    любой конечной вершины v грани eta; значения по всем вершинам должны совпасть
    """
    _check_cocycle(st, alpha)
    x = st.complex
    k = st.dim - alpha.p
    classes = vertex_classes(st, alpha)
    faces, weights = [], []
    for eta in x.faces:
        if eta.dim != k or eta.sedentarity:
            continue
        if not eta.vertices:
            raise GluingConflictException(f"Face {eta.label()} has no finite vertex")
        values = {}
        for vertex in eta.vertices:
            index = _vertex_face(st, vertex)
            alpha_v = classes.get(index)
            values[index] = _local_weight(st, alpha_v, index, eta) if alpha_v is not None else Fraction(0)
        lowest = min(values)
        if any(value != values[lowest] for value in values.values()):
            logger.warning(f"Local weights on {eta.label()} disagree: {values}")
            raise GluingConflictException(f"Vertices of face {eta.label()} give different weights")
        faces.append(eta.index)
        weights.append(values[lowest])
    weight = MinkowskiWeight(k, tuple(faces), weights)
    if not is_balanced(x, weight):
        logger.warning(f"Glued weight of degree {alpha.p} is not balanced")
        raise GluingConflictException("Glued weight is not balanced")
    return TropicalCycle(alpha.p, weight)


def _weights_at(st: SteenbrinkPage, vertex_index: int, weights: Mapping[int, Fraction]) -> dict:
    star = st.local.star(vertex_index)
    local = {}
    for face_index, value in weights.items():
        if value and face_index in star.cone_faces.values():
            local[star.cone_of(face_index)] = value
    return local


def steenbrink_mw_pairing(st: SteenbrinkPage, alpha: HodgeClass, w: MinkowskiWeight) -> Fraction:
    """<alpha, w> = sum_v <alpha_v, w_v> для w ∈ MW_p(Y)"""
    weights = w.as_dict()
    total = Fraction(0)
    for index, alpha_v in vertex_classes(st, alpha).items():
        if alpha_v.is_zero():
            continue
        total += evaluate(alpha_v, _weights_at(st, index, weights))
    return total


def kernel_pairing_matrix(st: SteenbrinkPage, p: int, check: bool = True) -> RationalMatrix:
    """ψ между базисами ker N ∩ H^{p,p} и ker N ∩ H^{d-p,d-p}"""
    left = hodge_locus_basis(st, p, check)
    right = hodge_locus_basis(st, st.dim - p, check)
    rows = []
    for alpha in left:
        x = _page_element(st, alpha)
        rows.append([psi_via_matrix(st, x, _page_element(st, beta)) for beta in right])
    return RationalMatrix.from_rows(rows, len(right))


def verify_class(st: SteenbrinkPage, alpha: HodgeClass, cyc: TropicalCycle) -> bool:
    """
    deg(alpha·beta) = sum_v deg(alpha_v beta_v) против <beta, w> через веса цикла,
    для всех коциклов beta ∈ K^{0,2d-2p}
    """
    if cyc.p != alpha.p or cyc.k != st.dim - alpha.p:
        return False
    gram = kernel_pairing_matrix(st, alpha.p, check=False)
    if gram.rows != gram.cols or rank(gram) != gram.rows:
        logger.warning(f"Kernel pairing in degree {alpha.p} is degenerate, the class is not pinned")
        return False
    q = st.dim - alpha.p
    duals = kernel_complex(st, 2 * q).cohomology(0).representatives
    left = vertex_classes(st, alpha)
    weights = cyc.weight.as_dict()
    for representative in duals:
        beta = vertex_classes(st, HodgeClass(q, representative))
        expected = Fraction(0)
        for index, beta_v in beta.items():
            alpha_v = left.get(index)
            if alpha_v is not None:
                expected += pairing(alpha_v, beta_v)
        paired = Fraction(0)
        for index, beta_v in beta.items():
            if not beta_v.is_zero():
                paired += evaluate(beta_v, _weights_at(st, index, weights))
        if expected != paired:
            logger.debug(f"deg(alpha beta) = {expected}, <beta, w> = {paired}")
            return False
    return True


def mw_pairing(cc: CellularComplex, cochain: Sequence, w: MinkowskiWeight) -> Fraction:
    """<c, w> = sum_eta w(eta) c_eta(n_eta)"""
    x = cc.complex
    total = Fraction(0)
    for index, value in zip(w.faces, w.weights):
        if value:
            total += value * cc.evaluate(cochain, index, multivector(x.faces[index]))
    return total


def _layout(st: SteenbrinkPage, k: int, chow_degree: int) -> tuple[dict, int]:
    offsets = {}
    position = 0
    for face in st.complex.faces_of_dim(k):
        offsets[face.index] = position
        position += st.local.ring(face.index).dim_of(chow_degree)
    return offsets, position


def _pairs(st: SteenbrinkPage, k: int) -> list[tuple[Face, Face]]:
    x = st.complex
    pairs = []
    for gamma in x.faces_of_dim(k):
        for up in sorted(x.cofacets[gamma.index]):
            delta = x.faces[up]
            if delta.sedentarity == gamma.sedentarity:
                pairs.append((gamma, delta))
    return pairs


def _solve(matrix: RationalMatrix, target: Sequence, rng: Optional[random.Random]) -> Optional[Vector]:
    if rng is None:
        return solve(matrix, target)
    order = list(range(matrix.cols))
    rng.shuffle(order)
    solution = solve(matrix.submatrix(list(range(matrix.rows)), order), target)
    if solution is None:
        return None
    result = [Fraction(0)] * matrix.cols
    for position, column in enumerate(order):
        result[column] = solution[position]
    return tuple(result)


def _zigzag_step(st: SteenbrinkPage, p: int, k: int, current: Sequence,
                 rng: Optional[random.Random]) -> Vector:
    """
    Один шаг: прообраз при sign(gamma,delta) id⊗Gys (влево), затем (·∧ν^∨)⊗id (вправо).
    Λ^k T^∨gamma одномерно, поэтому шаг вправо сводится к умножению на sign(gamma,delta).
    """
    x = st.complex
    bottom, bottom_size = _layout(st, k, p - k)
    above, above_size = _layout(st, k + 1, p - k - 1)
    pairs = _pairs(st, k)
    columns = []
    placement = []
    for gamma, delta in pairs:
        ring = st.local.ring(delta.index)
        incidence = sign(x, gamma, delta)
        for i in range(ring.dim_of(p - k - 1)):
            image = gysin(st.local, gamma, delta, ring.basis_class(p - k - 1, i))
            column = [Fraction(0)] * bottom_size
            for j, value in enumerate(image.coefficients):
                column[bottom[gamma.index] + j] = incidence * value
            columns.append(column)
            placement.append((above[delta.index] + i, incidence))
    matrix = RationalMatrix.from_columns(columns, bottom_size)
    preimage = _solve(matrix, current, rng) if columns else (None if any(current) else ())
    if preimage is None:
        logger.warning(f"Zigzag step {k} of degree {p}: no preimage under Gysin")
        raise ZigzagInconsistentException(f"No preimage in the zigzag at step {k}")
    result = [Fraction(0)] * above_size
    for value, (position, incidence) in zip(preimage, placement):
        result[position] += incidence * value
    return tuple(result)


def zigzag_representative(st: SteenbrinkPage, alpha: HodgeClass, cc: Optional[CellularComplex] = None,
                          rng: Optional[random.Random] = None) -> Vector:
    """
    Коцикл C^{p,p}(X), представляющий образ alpha при изоморфизме P^{0,2p} ≃ PH^{p,p}.
    rng задаёт другой выбор частных решений.
    """
    _check_cocycle(st, alpha)
    x = st.complex
    p = alpha.p
    cc = cc or cellular_complex(x, p)
    offsets, size = _layout(st, 0, p)
    current = [Fraction(0)] * size
    for index, alpha_v in vertex_classes(st, alpha).items():
        for i, value in enumerate(alpha_v.coefficients):
            current[offsets[index] + i] = value
    current = tuple(current)
    for k in range(p):
        current = _zigzag_step(st, p, k, current, rng)

    final, _ = _layout(st, p, 0)
    n = cc.dim(p)
    rows, target = [], []
    for face in x.faces_of_dim(p):
        row = [Fraction(0)] * n
        start = cc.offsets[face.index]
        for t, value in enumerate(cc.spaces[face.index].coordinates(multivector(face))):
            row[start + t] = value
        rows.append(row)
        target.append(current[final[face.index]])
    differential = cc.cochains.differential(p)
    rows += differential.to_rows()
    target += [Fraction(0)] * differential.rows
    cochain = _solve(RationalMatrix.from_rows(rows, n), target, rng) if n else ()
    if cochain is None:
        logger.warning(f"Zigzag of degree {p} does not end in a cocycle")
        raise ZigzagInconsistentException("No cocycle of C^{p,p} restricts to the end of the zigzag")
    return cochain


def zigzag_choice_independent(st: SteenbrinkPage, alpha: HodgeClass, rng: random.Random,
                              cc: Optional[CellularComplex] = None) -> bool:
    cc = cc or cellular_complex(st.complex, alpha.p)
    first = zigzag_representative(st, alpha, cc)
    second = zigzag_representative(st, alpha, cc, rng)
    difference = [a - b for a, b in zip(first, second)]
    return cc.cochains.cohomology(alpha.p).is_coboundary(difference)


@frozen
class NumericalReport:
    p: int
    q: int
    matrix: RationalMatrix = field(eq=False)
    locus_dim: int
    kernel_dim: int
    image_dim: int
    total: int
    intersection: int
    orthogonal: bool

    @property
    def ok(self) -> bool:
        return (
            self.locus_dim == self.kernel_dim
            and self.kernel_dim + self.image_dim == self.total
            and not self.intersection
            and self.orthogonal
        )


def numerical_vs_homological(st: SteenbrinkPage, p: int) -> NumericalReport:
    """
    Невырожденность ψ на ker N x ker N в дополнительных степенях, H^{p,p} = ker N ⊕ Im N
    на уровне рангов и ортогональность ker N и Im N
    """
    if not verify_hl(st).ok:
        raise HLFailureException("Numerical equivalence check needs Hard Lefschetz")
    d = st.dim
    q = d - p
    matrix = kernel_pairing_matrix(st, p, check=False)
    if matrix.rows != matrix.cols or rank(matrix) != matrix.rows:
        logger.warning(f"Kernel pairing between degrees {p} and {q} has rank {rank(matrix)}")
        raise DegeneratePairingException(f"ψ on ker N in degrees ({p}, {q}) is degenerate")

    b = 2 * p
    cohomology = st.cohomology(0, b)
    total = cohomology.dim
    kernel = kernel_basis(monodromy_on_cohomology(st, 0, b)).basis if total else ()
    incoming = induced_map(st.n_matrix(-2, b + 2), st.cohomology(-2, b + 2), cohomology)
    image = image_basis(incoming).basis if total and incoming.cols else ()
    combined = span_rank(list(kernel) + list(image), total) if total else 0
    intersection = len(kernel) + len(image) - combined

    orthogonal = True
    partner = st.cohomology(-2, 2 * q + 2)
    lifted = [st.n_matrix(-2, 2 * q + 2).apply(r) for r in partner.representatives]
    for coordinates in kernel:
        left = PageElement(0, b, _combination(cohomology.representatives, coordinates, st.row_dim(0, b)))
        for y in lifted:
            if psi_via_matrix(st, left, PageElement(0, 2 * q, y)):
                orthogonal = False
    report = NumericalReport(
        p=p,
        q=q,
        matrix=matrix,
        locus_dim=len(hodge_locus_basis(st, p, check=False)),
        kernel_dim=len(kernel),
        image_dim=len(image),
        total=total,
        intersection=intersection,
        orthogonal=orthogonal,
    )
    if not report.ok:
        logger.warning(f"Decomposition of H^{{{p},{p}}} fails: {report}")
    return report


def hodge_class_from_json(st: SteenbrinkPage, data: dict) -> HodgeClass:
    """{"p": p, "vertices": {"<face-id>": {"<лучи через запятую>": "коэффициент"}}}"""
    try:
        p = int(data["p"])
        vertices = data["vertices"]
        positions = st.positions.get((0, 2 * p), {})
        values = [Fraction(0)] * st.block_dim(0, 2 * p, 0)
        indices = st.block_indices(0, 2 * p, 0)
        for face_id, monomials in vertices.items():
            index = int(face_id)
            face = st.complex.faces[index]
            if face.dim or not face.is_finite:
                raise MalformedInputException(f"Face {face_id} is not a finite vertex")
            ring = st.local.ring(index)
            polynomial = {}
            for key, coefficient in monomials.items():
                monomial = tuple(sorted(int(r) for r in key.split(",") if r.strip())) if key else ()
                if any(r >= len(ring.fan.rays) for r in monomial):
                    raise MalformedInputException(f"Ray outside the star fan of vertex {face_id}: {key}")
                polynomial[monomial] = polynomial.get(monomial, Fraction(0)) + parse_rational(coefficient)
            local = ring.reduce(p, polynomial)
            for i, value in enumerate(local.coefficients):
                values[indices.index(positions[(0, index, i)])] = value
    except (KeyError, TypeError, ValueError, AttributeError, IndexError) as e:
        raise MalformedInputException(f"Class schema violated: {e}")
    return HodgeClass(p, values)


def hodge_class_to_json(st: SteenbrinkPage, alpha: HodgeClass) -> dict:
    vertices = {}
    for index, alpha_v in sorted(vertex_classes(st, alpha).items()):
        polynomial = alpha_v.ring.polynomial(alpha_v)
        if polynomial:
            vertices[str(index)] = {
                ",".join(str(r) for r in monomial): format_rational(value)
                for monomial, value in sorted(polynomial.items())
            }
    return {"p": alpha.p, "vertices": vertices}


def cycle_to_json(cyc: TropicalCycle) -> dict:
    return {
        "p": cyc.p,
        "weights": {str(index): format_rational(value) for index, value in zip(cyc.weight.faces, cyc.weight.weights)},
    }
