import logging
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional, Sequence

from attrs import frozen

from exact_la import (
    GradedComplex,
    RationalMatrix,
    Subspace,
    Vector,
    det,
    independent_subset,
    rank,
    to_vector,
    zero_vector,
)
from exceptions import DegeneratePairingException, NotASubspaceException, VerificationFailedException
from polyhedral import Face, FaceComplex, project_to_stratum, sign, stratum_projection, tangent_coordinates
from utils import sign_of

logger = logging.getLogger(__name__)


def wedge(vectors: Sequence[Sequence], n: int) -> Vector:
    """
    Координаты v_1 ∧ ... ∧ v_p в Λ^p Q^n по лексикографическому базису e_I:
    минор строк I матрицы со столбцами v_j
    """
    p = len(vectors)
    result = []
    for rows in combinations(range(n), p):
        result.append(det(RationalMatrix.from_rows([[v[i] for v in vectors] for i in rows], p)))
    return tuple(result)


def wedge_power(a: RationalMatrix, p: int) -> RationalMatrix:
    """Λ^p A: элемент (J, I) равен минору A[J, I]"""
    row_sets = list(combinations(range(a.rows), p))
    col_sets = list(combinations(range(a.cols), p))
    dense = a.to_rows()
    entries = {}
    for j, rows in enumerate(row_sets):
        for i, cols in enumerate(col_sets):
            minor = det(RationalMatrix.from_rows([[dense[r][c] for c in cols] for r in rows], p))
            if minor:
                entries[(j, i)] = minor
    return RationalMatrix(len(row_sets), len(col_sets), entries)


def permutation_sign(order: Sequence[int]) -> int:
    order = list(order)
    result = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                result = -result
    return result


@frozen(hash=False)
class CoefficientSpace:
    """F_p(delta): сумма Λ^p касательных пространств кограней той же седентарности"""
    face: Face
    p: int
    span: Subspace

    @property
    def dim(self) -> int:
        return self.span.dim

    @property
    def basis(self) -> tuple:
        return self.span.basis

    def coordinates(self, multivector: Sequence) -> Vector:
        if not self.dim:
            if any(multivector):
                raise NotASubspaceException(f"Multivector outside F_{self.p} of face {self.face.index}")
            return ()
        coordinates = self.span.coordinates(multivector)
        if coordinates is None:
            raise NotASubspaceException(f"Multivector outside F_{self.p} of face {self.face.index}")
        return coordinates


def coefficient_space(x: FaceComplex, delta: Face, p: int) -> CoefficientSpace:
    n = delta.stratum_rank
    ambient = comb(n, p)
    vectors = []
    for index in x.cofaces(delta.index):
        tangent = x.faces[index].tangent_basis
        for subset in combinations(tangent, p):
            vectors.append(wedge(subset, n))
    chosen = independent_subset(vectors, ambient)
    return CoefficientSpace(delta, p, Subspace(ambient, [vectors[i] for i in chosen]))


def _transport(x: FaceComplex, gamma: Face, delta: Face, p: int) -> RationalMatrix:
    """Λ^p отображения страт delta -> gamma (тождество для одной седентарности)"""
    if gamma.sedentarity == delta.sedentarity:
        return RationalMatrix.identity(comb(delta.stratum_rank, p))
    return wedge_power(stratum_projection(x, delta.sedentarity, gamma.sedentarity), p)


@frozen(hash=False)
class CellularComplex:
    """
    Клеточный комплекс C_{p,•} и двойственный C^{p,•}. Коцепь степени q - вектор значений
    на базисах F_p(delta) граней размерности q, блоки идут в порядке индексов граней.
    """
    complex: FaceComplex
    p: int
    spaces: tuple
    cells: dict
    offsets: dict
    boundaries: dict
    cochains: GradedComplex

    def dim(self, q: int) -> int:
        return self.cochains.dim(q)

    def block(self, vector: Sequence, face_index: int) -> Vector:
        start = self.offsets[face_index]
        return tuple(vector[start:start + self.spaces[face_index].dim])

    def evaluate(self, cochain: Sequence, face_index: int, multivector: Sequence) -> Fraction:
        coordinates = self.spaces[face_index].coordinates(multivector)
        return sum((c * v for c, v in zip(coordinates, self.block(cochain, face_index))), Fraction(0))

    def embed(self, q: int, values: dict) -> Vector:
        vector = list(zero_vector(self.dim(q)))
        for face_index, block in values.items():
            start = self.offsets[face_index]
            for i, value in enumerate(block):
                vector[start + i] = Fraction(value)
        return tuple(vector)


def cellular_complex(x: FaceComplex, p: int) -> CellularComplex:
    spaces = tuple(coefficient_space(x, face, p) for face in x.faces)
    cells: dict = {}
    offsets: dict = {}
    dims: dict = {}
    for q in range(x.dim + 1):
        cells[q] = tuple(f.index for f in x.faces if f.dim == q)
        position = 0
        for index in cells[q]:
            offsets[index] = position
            position += spaces[index].dim
        dims[q] = position
    boundaries = {}
    for q in range(1, x.dim + 1):
        entries = {}
        for delta_index in cells[q]:
            delta = x.faces[delta_index]
            source = spaces[delta_index]
            for gamma_index in x.facets[delta_index]:
                gamma = x.faces[gamma_index]
                target = spaces[gamma_index]
                incidence = sign(x, gamma, delta)
                transport = _transport(x, gamma, delta, p)
                for j, vector in enumerate(source.basis):
                    image = target.coordinates(transport.apply(vector))
                    for i, value in enumerate(image):
                        if value:
                            key = (offsets[gamma_index] + i, offsets[delta_index] + j)
                            entries[key] = entries.get(key, Fraction(0)) + incidence * value
        boundaries[q] = RationalMatrix(dims[q - 1], dims[q], entries)
    differentials = {q - 1: matrix.transpose() for q, matrix in boundaries.items()}
    cochains = GradedComplex(dims, differentials)
    logger.debug(f"C^{{{p},*}} dims {[dims[q] for q in sorted(dims)]}")
    return CellularComplex(x, p, spaces, cells, offsets, boundaries, cochains)


def tropical_cohomology(x: FaceComplex, p: int) -> list[int]:
    cc = cellular_complex(x, p)
    if not cc.cochains.squares_to_zero():
        raise VerificationFailedException(f"Cellular differential of C^{{{p},*}} does not square to zero")
    dims = cc.cochains.cohomology_dims()
    return [dims.get(q, 0) for q in range(x.dim + 1)]


def hodge_diamond(x: FaceComplex) -> dict:
    diamond = {}
    for p in range(x.dim + 1):
        for q, h in enumerate(tropical_cohomology(x, p)):
            diamond[(p, q)] = h
    logger.info(f"Hodge diamond: {diamond}")
    return diamond


def euler_check(cc: CellularComplex) -> bool:
    dims = cc.cochains.cohomology_dims()
    chains = sum((-1) ** q * cc.dim(q) for q in cc.cells)
    homology = sum((-1) ** q * h for q, h in dims.items())
    return chains == homology


def fundamental_class(x: FaceComplex, cc: Optional[CellularComplex] = None) -> Vector:
    """
    Цикл в C_{d,d}: сумма e ⊗ n_e по граням размерности d с каноническими поливекторами
    """
    d = x.dim
    cc = cc or cellular_complex(x, d)
    values = {}
    for index in cc.cells[d]:
        values[index] = cc.spaces[index].coordinates(multivector(x.faces[index]))
    chain = cc.embed(d, values)
    if d > 0 and any(cc.boundaries[d].apply(chain)):
        raise VerificationFailedException("Fundamental chain is not a cycle")
    return chain


def _orientation_sign(face: Face, vectors: Sequence[Sequence]) -> int:
    if not vectors:
        return 1
    columns = [tangent_coordinates(face, v) for v in vectors]
    return sign_of(det(RationalMatrix.from_columns(columns, face.dim)))


def _points(x: FaceComplex, sedentarity: frozenset, vertex_ids: Sequence[int]) -> list:
    return [project_to_stratum(x, sedentarity, x.vertices[v]) for v in vertex_ids]


def _difference(a: Sequence, b: Sequence) -> tuple:
    return tuple(ai - bi for ai, bi in zip(a, b))


def _cup_on_cell(left: CellularComplex, right: CellularComplex, alpha: Sequence, beta: Sequence,
                 e: Face, q: int) -> Fraction:
    """
    (alpha ∪ beta)(e)(n_e) через диагональ Александера-Уитни на симплексе
    и диагональ Серра на каждом отрезке [0, ∞] свободного луча
    """
    x = left.complex
    vertex_ids, ray_ids, sigma = e.vertices, e.rays, e.sedentarity
    free = [r for r in ray_ids if r not in sigma]
    k = len(vertex_ids) - 1
    p = left.p
    d = e.dim
    tangent = e.tangent_basis
    total = Fraction(0)
    for i in range(k + 1):
        size = q - i
        if not 0 <= size <= len(free):
            continue
        for chosen in combinations(free, size):
            chosen_set = frozenset(chosen)
            front = x.faces[x.lookup[(vertex_ids[:i + 1], tuple(sorted(sigma | chosen_set)), sigma)]]
            back_sed = sigma | chosen_set
            back = x.faces[x.lookup[(vertex_ids[i:], ray_ids, back_sed)]]
            front_dims = [i] + [int(r in chosen_set) for r in free]
            back_dims = [k - i] + [int(r not in chosen_set) for r in free]
            exponent = sum(back_dims[a] * front_dims[b]
                           for a in range(len(free) + 1) for b in range(a + 1, len(free) + 1))
            front_points = _points(x, sigma, vertex_ids[:i + 1])
            front_vectors = [_difference(pt, front_points[0]) for pt in front_points[1:]]
            front_vectors += [project_to_stratum(x, sigma, x.rays[r]) for r in chosen]
            back_points = _points(x, back_sed, vertex_ids[i:])
            back_vectors = [_difference(pt, back_points[0]) for pt in back_points[1:]]
            back_vectors += [project_to_stratum(x, back_sed, x.rays[r]) for r in free if r not in chosen_set]
            orientation = _orientation_sign(front, front_vectors) * _orientation_sign(back, back_vectors)
            projection = stratum_projection(x, sigma, back_sed) if chosen_set else None
            projected = [projection.apply(t) if projection else t for t in tangent]
            value = Fraction(0)
            for subset in combinations(range(d), p):
                rest = [j for j in range(d) if j not in subset]
                a = left.evaluate(alpha, front.index, wedge([tangent[j] for j in subset], e.stratum_rank))
                if not a:
                    continue
                b = right.evaluate(beta, back.index, wedge([projected[j] for j in rest], back.stratum_rank))
                value += permutation_sign(list(subset) + rest) * a * b
            total += (-1) ** exponent * orientation * value
    return total


def cup_pairing(left: CellularComplex, right: CellularComplex, alpha: Sequence, beta: Sequence,
                q: int) -> Fraction:
    """<alpha ∪ beta, [X]> для alpha ∈ C^{p,q}, beta ∈ C^{d-p,d-q}"""
    x = left.complex
    d = x.dim
    return sum((_cup_on_cell(left, right, alpha, beta, x.faces[index], q) for index in left.cells.get(d, ())),
               Fraction(0))


def poincare_pairing(x: FaceComplex, p: int, q: int,
                     complexes: Optional[dict] = None) -> RationalMatrix:
    """
    Матрица спаривания H^{p,q} x H^{d-p,d-q} в базисах представителей;
    вырожденность означает негладкий вход
    """
    d = x.dim
    complexes = complexes if complexes is not None else {}
    for degree in (p, d - p):
        if degree not in complexes:
            complexes[degree] = cellular_complex(x, degree)
    left, right = complexes[p], complexes[d - p]
    fundamental_class(x, complexes.get(d) or cellular_complex(x, d))
    first = left.cochains.cohomology(q).representatives
    second = right.cochains.cohomology(d - q).representatives
    matrix = RationalMatrix.from_rows(
        [[cup_pairing(left, right, alpha, beta, q) for beta in second] for alpha in first], len(second)
    )
    if len(first) != len(second) or rank(matrix) != len(first):
        logger.warning(f"Poincare pairing H^{p},{q} x H^{d - p},{d - q} is degenerate")
        raise DegeneratePairingException(
            f"Pairing H^{{{p},{q}}} x H^{{{d - p},{d - q}}} has shape {len(first)}x{len(second)} "
            f"and rank {rank(matrix)}"
        )
    return matrix


def check_poincare_duality(x: FaceComplex) -> dict:
    complexes = {p: cellular_complex(x, p) for p in range(x.dim + 1)}
    report = {}
    for p in range(x.dim + 1):
        for q in range(x.dim + 1):
            try:
                poincare_pairing(x, p, q, complexes)
                report[(p, q)] = True
            except DegeneratePairingException:
                report[(p, q)] = False
    return report


def multivector(face: Face) -> Vector:
    """Канонический поливектор n_face"""
    return to_vector(wedge(face.tangent_basis, face.stratum_rank))
