import logging
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping, Optional, Sequence, Union

from attrs import field, frozen

from exact_la import (
    RationalMatrix,
    image_basis,
    inverse,
    kernel_basis,
    rank,
    solve,
    span_rank,
    to_vector,
    zero_vector,
)
from exceptions import (
    DegreeMismatchException,
    NotCodimOneException,
    NotUnimodularException,
    RankDeficientException,
)
from polyhedral import Face, FaceComplex, Fan, StarFan, fan_complex, primitive_normal, star_fan

logger = logging.getLogger(__name__)

Monomial = tuple


def _monomial(rays) -> Monomial:
    return tuple(sorted(rays))


@frozen(hash=False)
class ChowClass:
    ring: "ChowRing" = field(eq=False, repr=False)
    degree: int
    coefficients: tuple = field(converter=to_vector)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def __add__(self, other: "ChowClass") -> "ChowClass":
        if other.degree != self.degree:
            raise DegreeMismatchException(f"Adding classes of degrees {self.degree} and {other.degree}")
        return ChowClass(self.ring, self.degree, [a + b for a, b in zip(self.coefficients, other.coefficients)])

    def scale(self, factor) -> "ChowClass":
        factor = Fraction(factor)
        return ChowClass(self.ring, self.degree, [c * factor for c in self.coefficients])


@frozen(hash=False)
class ChowRing:
    """
    Кольцо Чжоу A^*(Σ) = Q[x_ρ] / (I_1 + I_2) по степеням.
    monomials[p] - мономы степени p с носителем-конусом, basis[p] - выбранный мономиальный базис,
    reduction[p] - матрица, переводящая вектор по monomials[p] в координаты по basis[p].
    """
    fan: Fan
    cone_set: frozenset
    monomials: dict
    monomial_index: dict
    basis: dict
    reduction: dict

    @property
    def dim(self) -> int:
        return self.fan.dim

    @property
    def dims(self) -> tuple:
        return tuple(len(self.basis[p]) for p in range(self.dim + 1))

    def dim_of(self, p: int) -> int:
        return len(self.basis[p]) if 0 <= p <= self.dim else 0

    def zero(self, p: int) -> ChowClass:
        return ChowClass(self, p, zero_vector(self.dim_of(p)))

    def one(self) -> ChowClass:
        return ChowClass(self, 0, [1])

    def basis_class(self, p: int, i: int) -> ChowClass:
        coefficients = [0] * self.dim_of(p)
        coefficients[i] = 1
        return ChowClass(self, p, coefficients)

    def basis_classes(self, p: int) -> list[ChowClass]:
        return [self.basis_class(p, i) for i in range(self.dim_of(p))]

    def is_cone(self, rays) -> bool:
        return frozenset(rays) in self.cone_set

    def reduce(self, p: int, polynomial: Mapping[Monomial, Fraction]) -> ChowClass:
        """Класс многочлена степени p; мономы с носителем не-конусом равны нулю"""
        if not 0 <= p <= self.dim:
            return ChowClass(self, p, [])
        vector = [Fraction(0)] * len(self.monomials[p])
        for monomial, coefficient in polynomial.items():
            if len(monomial) != p:
                raise DegreeMismatchException(f"Monomial {monomial} in degree {p}")
            if not self.is_cone(monomial):
                continue
            vector[self.monomial_index[p][_monomial(monomial)]] += coefficient
        return ChowClass(self, p, self.reduction[p].apply(vector))

    def monomial_class(self, rays) -> ChowClass:
        rays = _monomial(rays)
        return self.reduce(len(rays), {rays: Fraction(1)})

    def polynomial(self, c: ChowClass) -> dict:
        return {self.basis[c.degree][i]: v for i, v in enumerate(c.coefficients) if v}


def _cone_monomials(fan: Fan, p: int) -> list[Monomial]:
    squarefree = [_monomial(c) for c in fan.cones_of_dim(p)]
    others = set()
    for cone in fan.cones:
        if 0 < len(cone) < p:
            for extra in combinations_with_replacement(sorted(cone), p - len(cone)):
                others.add(_monomial(tuple(cone) + extra))
    return squarefree + sorted(others)


def chow_ring(f: Fan) -> ChowRing:
    """
    Все степени A^p(Σ): линейная алгебра над мономами с носителем-конусом
    """
    if not f.is_unimodular():
        raise NotUnimodularException("Chow rings are computed for unimodular fans only")
    cone_set = frozenset(f.cones)
    monomials, monomial_index, basis, reduction = {}, {}, {}, {}
    for p in range(f.dim + 1):
        monomials[p] = _cone_monomials(f, p)
        monomial_index[p] = {m: i for i, m in enumerate(monomials[p])}
        size = len(monomials[p])
        relations = []
        if p > 0:
            for mu in monomials[p - 1]:
                for j in range(f.lattice_rank):
                    relation = [Fraction(0)] * size
                    for rho, ray in enumerate(f.rays):
                        if not ray[j]:
                            continue
                        product = _monomial(mu + (rho,))
                        if frozenset(product) in cone_set:
                            relation[monomial_index[p][product]] += ray[j]
                    if any(relation):
                        relations.append(relation)
        relation_span = image_basis(RationalMatrix.from_columns(relations, size)).basis if relations else ()
        chosen: list[int] = []
        columns = list(relation_span)
        current = span_rank(columns, size) if columns else 0
        for i in range(size):
            if current == size:
                break
            unit = [Fraction(int(k == i)) for k in range(size)]
            if span_rank(columns + [unit], size) > current:
                columns.append(unit)
                chosen.append(i)
                current += 1
        basis[p] = tuple(monomials[p][i] for i in chosen)
        if size:
            square = RationalMatrix.from_columns([[Fraction(int(k == i)) for k in range(size)] for i in chosen]
                                                 + list(relation_span), size)
            inverse_rows = inverse(square)
            reduction[p] = inverse_rows.submatrix(list(range(len(chosen))), list(range(size)))
        else:
            reduction[p] = RationalMatrix.zeros(0, 0)
    ring = ChowRing(f, cone_set, monomials, monomial_index, basis, reduction)
    logger.debug(f"Chow ring dims {ring.dims}")
    return ring


def product(a: ChowClass, b: ChowClass) -> ChowClass:
    ring = a.ring
    p = a.degree + b.degree
    if p > ring.dim:
        return ChowClass(ring, p, [])
    polynomial: dict = {}
    for ma, ca in ring.polynomial(a).items():
        for mb, cb in ring.polynomial(b).items():
            key = _monomial(ma + mb)
            polynomial[key] = polynomial.get(key, Fraction(0)) + ca * cb
    return ring.reduce(p, polynomial)


def degree(c: ChowClass) -> Fraction:
    """Степень класса старшей степени: x_η -> 1 для максимального конуса η"""
    ring = c.ring
    if c.degree != ring.dim:
        raise DegreeMismatchException(f"Degree map needs a class of degree {ring.dim}, got {c.degree}")
    if ring.dim_of(ring.dim) != 1:
        raise RankDeficientException(f"Top Chow group has dimension {ring.dim_of(ring.dim)}")
    return c.coefficients[0]


def pairing(a: ChowClass, b: ChowClass) -> Fraction:
    if a.degree + b.degree != a.ring.dim:
        raise DegreeMismatchException(f"Degrees {a.degree} and {b.degree} are not complementary")
    return degree(product(a, b))


def gram_matrix(ring: ChowRing, p: int) -> RationalMatrix:
    left = ring.basis_classes(p)
    right = ring.basis_classes(ring.dim - p)
    return RationalMatrix.from_rows([[pairing(a, b) for b in right] for a in left], len(right))


def _expand(factors: Sequence[Mapping[int, Fraction]]) -> dict:
    polynomial = {(): Fraction(1)}
    for factor in factors:
        expanded: dict = {}
        for monomial, coefficient in polynomial.items():
            for ray, value in factor.items():
                key = _monomial(monomial + (ray,))
                expanded[key] = expanded.get(key, Fraction(0)) + coefficient * value
        polynomial = {k: v for k, v in expanded.items() if v}
    return polynomial


@frozen
class MinkowskiWeight:
    """Веса на k-гранях комплекса, удовлетворяющие условию балансировки"""
    k: int
    faces: tuple
    weights: tuple = field(converter=to_vector)

    def weight(self, face_index: int) -> Fraction:
        for index, value in zip(self.faces, self.weights):
            if index == face_index:
                return value
        return Fraction(0)

    def as_dict(self) -> dict:
        return {index: value for index, value in zip(self.faces, self.weights)}

    def __add__(self, other: "MinkowskiWeight") -> "MinkowskiWeight":
        return MinkowskiWeight(self.k, self.faces, [a + b for a, b in zip(self.weights, other.weights)])


def _as_complex(y: Union[FaceComplex, Fan]) -> FaceComplex:
    return fan_complex(y) if isinstance(y, Fan) else y


def balancing_matrix(y: Union[FaceComplex, Fan], k: int) -> tuple[RationalMatrix, list[int]]:
    x = _as_complex(y)
    top = [f.index for f in x.faces if f.dim == k and not f.sedentarity]
    rows = []
    for gamma in x.faces:
        if gamma.dim != k - 1 or gamma.sedentarity:
            continue
        width = gamma.stratum_rank - gamma.dim
        block = [[Fraction(0)] * len(top) for _ in range(width)]
        for column, index in enumerate(top):
            if index not in x.cofacets[gamma.index]:
                continue
            normal = primitive_normal(x, gamma, x.faces[index])
            for r in range(width):
                block[r][column] = Fraction(normal[r])
        rows.extend(block)
    return RationalMatrix.from_rows(rows, len(top)), top


def minkowski_weights(y: Union[FaceComplex, Fan], k: int) -> list[MinkowskiWeight]:
    matrix, top = balancing_matrix(y, k)
    return [MinkowskiWeight(k, tuple(top), v) for v in kernel_basis(matrix).basis]


def is_balanced(y: Union[FaceComplex, Fan], w: MinkowskiWeight) -> bool:
    matrix, top = balancing_matrix(y, w.k)
    vector = [w.weight(i) for i in top]
    return not any(matrix.apply(vector))


def cap(alpha: ChowClass, complex_: Optional[FaceComplex] = None) -> MinkowskiWeight:
    """Вес Минковского tau -> deg(alpha * x_tau) на конусах размерности d - p"""
    ring = alpha.ring
    x = complex_ or fan_complex(ring.fan)
    k = ring.dim - alpha.degree
    faces = [f for f in x.faces if f.dim == k]
    weights = [degree(product(alpha, ring.monomial_class(f.rays))) for f in faces]
    return MinkowskiWeight(k, tuple(f.index for f in faces), weights)


def evaluate(alpha: ChowClass, weights_by_cone: Mapping[frozenset, Fraction]) -> Fraction:
    """Спаривание sum a_eta w(eta) по мономиальному представителю alpha"""
    total = Fraction(0)
    for monomial, coefficient in alpha.ring.polynomial(alpha).items():
        if len(set(monomial)) != len(monomial):
            raise DegreeMismatchException("Evaluation needs a squarefree representative")
        total += coefficient * Fraction(weights_by_cone.get(frozenset(monomial), 0))
    return total


def weights_by_cone(x: FaceComplex, w: MinkowskiWeight) -> dict:
    return {frozenset(x.faces[i].rays): value for i, value in zip(w.faces, w.weights)}


def chow_mw_duality(f: Fan, p: int) -> RationalMatrix:
    """
    Матрица изоморфизма A^p -> MW_{d-p}, alpha -> cap(alpha): столбец j - координаты веса
    tau -> deg(alpha_j x_tau) в базисе minkowski_weights(f, d - p), alpha_j из ring.basis_classes(p)
    """
    ring = chow_ring(f)
    x = fan_complex(f)
    k = ring.dim - p
    mw = minkowski_weights(x, k)
    if len(mw) != ring.dim_of(p):
        raise RankDeficientException(f"dim A^{p} = {ring.dim_of(p)} but dim MW_{k} = {len(mw)}")
    if not mw:
        return RationalMatrix.zeros(0, 0)
    mw_columns = RationalMatrix.from_columns([list(w.weights) for w in mw], len(mw[0].faces))
    columns = []
    for alpha in ring.basis_classes(p):
        image = cap(alpha, x)
        coordinates = solve(mw_columns, [image.weight(i) for i in mw[0].faces])
        if coordinates is None:
            raise RankDeficientException("Cap product is not balanced")
        columns.append(coordinates)
    matrix = RationalMatrix.from_columns(columns, len(mw))
    if rank(matrix) != len(mw):
        raise RankDeficientException(f"Chow-Minkowski map in degree {p} is not invertible")
    return matrix


class LocalChowRings:
    """
    Звёздные вееры граней комплекса и их кольца Чжоу, с ленивым кэшированием
    """

    def __init__(self, x: FaceComplex):
        self._x = x
        self._stars: dict = {}
        self._rings: dict = {}

    @property
    def complex(self) -> FaceComplex:
        return self._x

    def star(self, index: int) -> StarFan:
        if index not in self._stars:
            self._stars[index] = star_fan(self._x, self._x.faces[index])
        return self._stars[index]

    def ring(self, index: int) -> ChowRing:
        if index not in self._rings:
            self._rings[index] = chow_ring(self.star(index).fan)
        return self._rings[index]

    def distinguished_ray(self, gamma: Face, delta: Face) -> int:
        if gamma.index not in self._x.facets[delta.index] or gamma.sedentarity != delta.sedentarity:
            raise NotCodimOneException(f"Face {gamma.index} is not a facet of {delta.index} in one stratum")
        (rho,) = tuple(self.star(gamma.index).cone_of(delta.index))
        return rho


def restriction(local: LocalChowRings, gamma: Face, delta: Face, a: ChowClass,
                m: Optional[Sequence] = None) -> ChowClass:
    """
    i*: A^k(Σ^gamma) -> A^k(Σ^delta). x_ρ заменяется на -sum <m, e_ϱ> x_ϱ, где <m, e_ρ> = 1,
    затем x_ϱ -> x_ϱ', если ϱ и ρ порождают конус, иначе 0
    """
    rho = local.distinguished_ray(gamma, delta)
    source = local.star(gamma.index)
    target = local.star(delta.index)
    target_ring = local.ring(delta.index)
    rays = source.fan.rays
    if m is None:
        m = solve(RationalMatrix.from_rows([list(rays[rho])], len(rays[rho])), [1])
    if sum(Fraction(mi) * r for mi, r in zip(m, rays[rho])) != 1:
        raise ValueError("Functional m must take value 1 on the distinguished ray")

    def image(ray: int) -> dict:
        two_cone = source.cone_faces.get(frozenset({ray, rho}))
        if two_cone is None:
            return {}
        (target_ray,) = tuple(target.cone_of(two_cone))
        return {target_ray: Fraction(1)}

    generator_images = {}
    for ray in range(len(rays)):
        if ray == rho:
            combined: dict = {}
            for other in range(len(rays)):
                if other == rho:
                    continue
                value = sum(Fraction(mi) * c for mi, c in zip(m, rays[other]))
                if not value:
                    continue
                for target_ray, coefficient in image(other).items():
                    combined[target_ray] = combined.get(target_ray, Fraction(0)) - value * coefficient
            generator_images[ray] = combined
        else:
            generator_images[ray] = image(ray)

    polynomial: dict = {}
    for monomial, coefficient in a.ring.polynomial(a).items():
        for key, value in _expand([generator_images[r] for r in monomial]).items():
            polynomial[key] = polynomial.get(key, Fraction(0)) + coefficient * value
    if a.degree > target_ring.dim:
        return ChowClass(target_ring, a.degree, [])
    return target_ring.reduce(a.degree, polynomial)


def gysin(local: LocalChowRings, gamma: Face, delta: Face, a: ChowClass) -> ChowClass:
    """Gys: A^k(Σ^delta) -> A^{k+1}(Σ^gamma), x -> ι(x) x_ρ"""
    local.distinguished_ray(gamma, delta)
    source = local.star(delta.index)
    target = local.star(gamma.index)
    target_ring = local.ring(gamma.index)
    if a.degree + 1 > target_ring.dim:
        return ChowClass(target_ring, a.degree + 1, [])
    polynomial: dict = {}
    for monomial, coefficient in a.ring.polynomial(a).items():
        face = source.face_of(monomial)
        key = _monomial(target.cone_of(face))
        polynomial[key] = polynomial.get(key, Fraction(0)) + coefficient
    return target_ring.reduce(a.degree + 1, polynomial)
