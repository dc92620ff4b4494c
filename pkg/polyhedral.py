import logging
from collections import deque
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from attrs import field, frozen

from exact_la import (
    RationalMatrix,
    det,
    extends_to_lattice_basis,
    integer_kernel_basis,
    kernel_basis,
    primitive,
    rank,
    solve,
    to_vector,
)
from exceptions import (
    MalformedInputException,
    NotAFanException,
    NotCodimOneException,
    NotUnimodularException,
)
from utils import parse_rational, sign_of

logger = logging.getLogger(__name__)


@frozen
class Fan:
    """
    Симплициальный веер: примитивные лучи и конусы как множества индексов лучей.
    Пустой конус всегда присутствует, набор конусов замкнут относительно граней.
    """
    lattice_rank: int
    rays: tuple = field(converter=lambda rays: tuple(tuple(int(c) for c in r) for r in rays))
    cones: tuple = field(converter=lambda cones: tuple(frozenset(c) for c in cones))

    def __attrs_post_init__(self):
        for ray in self.rays:
            if len(ray) != self.lattice_rank:
                raise MalformedInputException(f"Ray {ray} does not live in rank {self.lattice_rank}")

    @property
    def dim(self) -> int:
        return max((len(c) for c in self.cones), default=0)

    def cones_of_dim(self, k: int) -> list[frozenset]:
        return [c for c in self.cones if len(c) == k]

    def maximal_cones(self) -> list[frozenset]:
        return [c for c in self.cones if not any(c < other for other in self.cones)]

    def is_cone(self, rays: Iterable[int]) -> bool:
        return frozenset(rays) in self._cone_set

    @property
    def _cone_set(self) -> frozenset:
        return frozenset(self.cones)

    def is_unimodular(self) -> bool:
        return all(is_lattice_basis_part([self.rays[i] for i in sorted(c)], self.lattice_rank)
                   for c in self.maximal_cones())

    def is_pure(self) -> bool:
        d = self.dim
        return all(len(c) == d for c in self.maximal_cones())


def close_cones(cones: Iterable[Iterable[int]]) -> list[frozenset]:
    """Замыкание набора конусов относительно граней, в детерминированном порядке"""
    closed = set()
    for cone in cones:
        cone = tuple(sorted(cone))
        for size in range(len(cone) + 1):
            for sub in combinations(cone, size):
                closed.add(frozenset(sub))
    return sorted(closed, key=lambda c: (len(c), sorted(c)))


def is_lattice_basis_part(vectors: Sequence[Sequence], n: int) -> bool:
    """
    Векторы дополняются до базиса решётки Z^n: целые и все инвариантные
    множители нормальной формы Смита равны 1
    """
    if not vectors:
        return True
    for vector in vectors:
        if any(Fraction(c).denominator != 1 for c in vector):
            return False
    return extends_to_lattice_basis([[int(Fraction(c)) for c in v] for v in vectors], n)


def quotient_rows(generators: Sequence[Sequence], n: int) -> tuple:
    """
    Строки матрицы проекции Z^n -> Z^n / <generators> (насыщенная подрешётка)
    """
    rows = [[int(Fraction(c)) for c in g] for g in generators]
    return tuple(integer_kernel_basis(rows, n))


def _apply_rows(rows: Sequence[Sequence[int]], vector: Sequence) -> tuple:
    return tuple(sum((Fraction(r[j]) * vector[j] for j in range(len(vector))), Fraction(0)) for r in rows)


def _improper_pair(generators: dict, first: Sequence, second: Sequence, dim: int,
                   admissible: Callable[[tuple], bool] = bool) -> bool:
    # точка в относительных внутренностях граней F ⊆ first и G ⊆ second при F != G
    for size_f in range(1, len(first) + 1):
        for face_f in combinations(first, size_f):
            if not admissible(face_f):
                continue
            for size_g in range(1, min(len(second), dim + 1 - size_f) + 1):
                for face_g in combinations(second, size_g):
                    if set(face_f) == set(face_g) or not admissible(face_g):
                        continue
                    columns = [generators[i] for i in face_f] + [tuple(-c for c in generators[i]) for i in face_g]
                    kernel = kernel_basis(RationalMatrix.from_columns(columns, dim))
                    if kernel.dim != 1:
                        continue
                    signs = {sign_of(c) for c in kernel.basis[0]}
                    if signs == {1} or signs == {-1}:
                        return True
    return False


def check_fan(fan: Fan) -> None:
    maximal = fan.maximal_cones()
    for cone in maximal:
        vectors = [fan.rays[i] for i in sorted(cone)]
        if vectors and rank(RationalMatrix.from_rows(vectors, fan.lattice_rank)) != len(vectors):
            raise NotAFanException(f"Cone {sorted(cone)} is not simplicial")
    generators = dict(enumerate(fan.rays))
    for first, second in combinations(maximal, 2):
        if _improper_pair(generators, sorted(first), sorted(second), fan.lattice_rank):
            raise NotAFanException(f"Cones {sorted(first)} and {sorted(second)} overlap improperly")


def check_faces(lattice_rank: int, vertices: Sequence, rays: Sequence, faces: Sequence[tuple]) -> None:
    """
    Каждая грань conv(V) + cone(R) симплициальна (вершины аффинно независимы вместе с лучами),
    пересечение любых двух граней является их общей гранью
    """
    generators = {("v", i): tuple(v) + (1,) for i, v in enumerate(vertices)}
    generators.update({("r", j): tuple(r) + (0,) for j, r in enumerate(rays)})

    def labels(face: tuple) -> list:
        return [("v", i) for i in face[0]] + [("r", j) for j in face[1]]

    for face in faces:
        columns = [generators[label] for label in labels(face)]
        if rank(RationalMatrix.from_columns(columns, lattice_rank + 1)) != len(columns):
            raise MalformedInputException(
                f"Face with vertices {list(face[0])} and rays {list(face[1])} is not a simplicial polyhedron"
            )
    maximal = [f for f in faces if not any(
        f != g and set(f[0]) <= set(g[0]) and set(f[1]) <= set(g[1]) for g in faces
    )]

    def has_vertex(face: tuple) -> bool:
        return any(label[0] == "v" for label in face)

    for first, second in combinations(maximal, 2):
        if _improper_pair(generators, labels(first), labels(second), lattice_rank + 1, has_vertex):
            raise MalformedInputException(
                f"Faces {labels(first)} and {labels(second)} do not meet in a common face"
            )


@frozen
class Face:
    """
    Грань (возможно, на бесконечности): представитель (V, R) входного комплекса и седентарность
    sigma ⊆ R. Координаты точек, лучей и касательного базиса заданы в страте N / N_sigma.
    """
    index: int
    dim: int
    sedentarity: frozenset
    vertices: tuple
    rays: tuple
    points: tuple
    free_rays: tuple
    tangent_basis: tuple

    @property
    def is_finite(self) -> bool:
        return not self.rays

    @property
    def base_point(self) -> tuple:
        return self.points[0]

    @property
    def stratum_rank(self) -> int:
        return len(self.points[0])

    def label(self) -> str:
        text = "v" + ",".join(str(v) for v in self.vertices)
        if self.rays:
            text += "|r" + ",".join(str(r) for r in self.rays)
        if self.sedentarity:
            text += "|s" + ",".join(str(s) for s in sorted(self.sedentarity))
        return text


@frozen(hash=False)
class FaceComplex:
    lattice_rank: int
    vertices: tuple
    rays: tuple
    faces: tuple
    facets: tuple
    cofacets: tuple
    strata: dict
    lookup: dict

    @property
    def dim(self) -> int:
        return max((f.dim for f in self.faces), default=-1)

    def faces_of_dim(self, k: int) -> list[Face]:
        return [f for f in self.faces if f.dim == k]

    def cofaces(self, index: int, same_sedentarity: bool = True) -> list[int]:
        """Все грани, содержащие данную (включая её саму), по возрастанию индекса"""
        start = self.faces[index]
        seen = {index}
        queue = deque([index])
        while queue:
            current = queue.popleft()
            for up in self.cofacets[current]:
                if up in seen:
                    continue
                if same_sedentarity and self.faces[up].sedentarity != start.sedentarity:
                    continue
                seen.add(up)
                queue.append(up)
        return sorted(seen)

    def subfaces(self, index: int) -> list[int]:
        seen = {index}
        queue = deque([index])
        while queue:
            current = queue.popleft()
            for down in self.facets[current]:
                if down not in seen:
                    seen.add(down)
                    queue.append(down)
        return sorted(seen)

    def open_part(self) -> list[Face]:
        return [f for f in self.faces if not f.sedentarity]

    def stratum(self, sedentarity: frozenset) -> tuple:
        return self.strata[frozenset(sedentarity)]

    def find(self, vertices: Iterable[int], rays: Iterable[int] = (), sedentarity: Iterable[int] = ()) -> Face:
        key = (tuple(sorted(vertices)), tuple(sorted(rays)), frozenset(sedentarity))
        if key not in self.lookup:
            raise KeyError(f"No face {key}")
        return self.faces[self.lookup[key]]

    def euler_characteristic(self) -> int:
        return sum((-1) ** f.dim for f in self.faces)


def _face_key(points: Sequence[tuple], free_rays: Sequence[tuple], sedentarity: frozenset):
    return sedentarity, frozenset(points), frozenset(free_rays)


def _assemble(lattice_rank: int, vertices: tuple, rays: tuple, triples: Iterable) -> FaceComplex:
    strata: dict = {}

    def stratum_rows(sedentarity: frozenset) -> tuple:
        if sedentarity not in strata:
            strata[sedentarity] = quotient_rows([rays[i] for i in sorted(sedentarity)], lattice_rank)
        return strata[sedentarity]

    ordered = sorted(set(triples), key=lambda t: (len(t[0]) + len(t[1]) - len(t[2]), t[0], t[1], sorted(t[2])))
    faces: list[Face] = []
    by_key: dict = {}
    triple_to_index: dict = {}
    for vertex_ids, ray_ids, sedentarity in ordered:
        rows = stratum_rows(sedentarity)
        points = tuple(_apply_rows(rows, vertices[v]) for v in vertex_ids)
        free = tuple(r for r in ray_ids if r not in sedentarity)
        free_vectors = tuple(tuple(int(c) for c in _apply_rows(rows, rays[r])) for r in free)
        key = _face_key(points, free_vectors, sedentarity)
        if key in by_key:
            triple_to_index[(vertex_ids, ray_ids, sedentarity)] = by_key[key]
            continue
        tangent = tuple(
            tuple(p[c] - points[0][c] for c in range(len(p))) for p in points[1:]
        ) + tuple(tuple(Fraction(c) for c in r) for r in free_vectors)
        if not is_lattice_basis_part(tangent, len(rows)):
            raise NotUnimodularException(
                f"Face with vertices {list(vertex_ids)} and rays {list(ray_ids)} is not unimodular"
            )
        index = len(faces)
        faces.append(Face(
            index=index,
            dim=len(tangent),
            sedentarity=sedentarity,
            vertices=vertex_ids,
            rays=ray_ids,
            points=points,
            free_rays=free_vectors,
            tangent_basis=tangent,
        ))
        by_key[key] = index
        triple_to_index[(vertex_ids, ray_ids, sedentarity)] = index

    facets: list[set] = [set() for _ in faces]
    cofacets: list[set] = [set() for _ in faces]
    for face in faces:
        vertex_ids, ray_ids, sedentarity = face.vertices, face.rays, face.sedentarity
        children = []
        if len(vertex_ids) >= 2:
            children += [(tuple(v for v in vertex_ids if v != drop), ray_ids, sedentarity) for drop in vertex_ids]
        for r in ray_ids:
            if r in sedentarity:
                continue
            children.append((vertex_ids, tuple(x for x in ray_ids if x != r), sedentarity))
            grown = sedentarity | {r}
            if (vertex_ids, ray_ids, grown) in triple_to_index:
                children.append((vertex_ids, ray_ids, grown))
        for child in children:
            child_index = triple_to_index[child]
            facets[face.index].add(child_index)
            cofacets[child_index].add(face.index)
    logger.debug(f"Assembled {len(faces)} faces in rank {lattice_rank}")
    return FaceComplex(
        lattice_rank=lattice_rank,
        vertices=vertices,
        rays=rays,
        faces=tuple(faces),
        facets=tuple(tuple(sorted(s)) for s in facets),
        cofacets=tuple(tuple(sorted(s)) for s in cofacets),
        strata=strata,
        lookup=triple_to_index,
    )


def _closed_pairs(faces: Iterable[tuple]) -> set:
    pairs = set()
    for vertex_ids, ray_ids in faces:
        for nv in range(1, len(vertex_ids) + 1):
            for sub_v in combinations(vertex_ids, nv):
                for nr in range(len(ray_ids) + 1):
                    for sub_r in combinations(ray_ids, nr):
                        pairs.add((sub_v, sub_r))
    return pairs


def build_complex(lattice_rank: int, vertices: Sequence, rays: Sequence, faces: Sequence[tuple]) -> FaceComplex:
    """
    Комплекс Y (седентарность 0) из вершин, лучей и граней conv(V) + cone(R).
    Для вееров список вершин пуст, добавляется начало координат.
    Грани комплекса проверяет check_faces, конусы веера - check_fan.
    """
    is_fan = not vertices
    if is_fan:
        vertices = [[0] * lattice_rank]
        faces = [((0,), tuple(face[1])) for face in faces] or [((0,), ())]
    vertex_tuple = tuple(to_vector(v) for v in vertices)
    ray_tuple = tuple(tuple(int(c) for c in r) for r in rays)
    for v in vertex_tuple:
        if len(v) != lattice_rank:
            raise MalformedInputException(f"Vertex {v} does not live in rank {lattice_rank}")
    for r in ray_tuple:
        if len(r) != lattice_rank:
            raise MalformedInputException(f"Ray {r} does not live in rank {lattice_rank}")
        if primitive(r) != r or not any(r):
            raise MalformedInputException(f"Ray {r} is not primitive")
    normalized = []
    for vertex_ids, ray_ids in faces:
        vertex_ids = tuple(sorted(set(int(v) for v in vertex_ids)))
        ray_ids = tuple(sorted(set(int(r) for r in ray_ids)))
        if not vertex_ids:
            raise MalformedInputException("Every face needs at least one vertex")
        if any(not 0 <= v < len(vertex_tuple) for v in vertex_ids):
            raise MalformedInputException(f"Vertex index out of range in face {list(vertex_ids)}")
        if any(not 0 <= r < len(ray_tuple) for r in ray_ids):
            raise MalformedInputException(f"Ray index out of range in face {list(ray_ids)}")
        normalized.append((vertex_ids, ray_ids))
    normalized = list(dict.fromkeys(normalized))
    if not is_fan:
        check_faces(lattice_rank, vertex_tuple, ray_tuple, normalized)
    triples = [(v, r, frozenset()) for v, r in _closed_pairs(normalized)]
    complex_ = _assemble(lattice_rank, vertex_tuple, ray_tuple, triples)
    logger.info(f"Loaded complex: {len(complex_.faces)} faces, dim {complex_.dim}")
    return complex_


def fan_complex(fan: Fan) -> FaceComplex:
    return build_complex(fan.lattice_rank, [], fan.rays, [((0,), tuple(sorted(c))) for c in fan.cones])


def complex_from_json(data: dict) -> FaceComplex:
    try:
        n = int(data["lattice_rank"])
        vertices = [[parse_rational(c) for c in v] for v in data.get("vertices", [])]
        rays = [[int(c) for c in r] for r in data.get("rays", [])]
        faces = [(f.get("vertices", []), f.get("rays", [])) for f in data["faces"]]
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedInputException(f"Complex schema violated: {e}")
    return build_complex(n, vertices, rays, faces)


def recession_fan(y: FaceComplex) -> Fan:
    cones = close_cones(face.rays for face in y.faces if not face.sedentarity)
    fan = Fan(y.lattice_rank, y.rays, cones)
    check_fan(fan)
    return fan


def compactify(y: FaceComplex) -> FaceComplex:
    """
    Каноническая компактификация: пары (gamma, sigma), sigma ⊆ R_gamma,
    с отождествлением пар, дающих одну и ту же грань в страте
    """
    fan = recession_fan(y)
    if not fan.is_unimodular():
        raise NotUnimodularException("Recession fan is not unimodular")
    triples = set()
    for face in y.faces:
        if face.sedentarity:
            continue
        for size in range(len(face.rays) + 1):
            for sigma in combinations(face.rays, size):
                triples.add((face.vertices, face.rays, frozenset(sigma)))
    compact = _assemble(y.lattice_rank, y.vertices, y.rays, triples)
    logger.info(f"Compactified: {len(compact.faces)} faces ({len(y.faces)} in the open part)")
    return compact


def _coordinates(basis: Sequence[Sequence], vector: Sequence) -> tuple:
    n = len(vector)
    solution = solve(RationalMatrix.from_columns([list(b) for b in basis], n), list(vector))
    if solution is None:
        raise ValueError("Vector outside the span of the basis")
    return solution


def inward_direction(gamma: Face, delta: Face) -> tuple:
    """Направление генератора delta, отсутствующего в gamma (одна седентарность)"""
    for point in delta.points:
        if point not in gamma.points:
            return tuple(point[c] - gamma.base_point[c] for c in range(len(point)))
    for ray in delta.free_rays:
        if ray not in gamma.free_rays:
            return tuple(Fraction(c) for c in ray)
    raise NotCodimOneException(f"Face {delta.index} adds no generator to face {gamma.index}")


def stratum_projection(x: FaceComplex, source: frozenset, target: frozenset) -> RationalMatrix:
    """Матрица A с Q_target = A Q_source для source ⊆ target"""
    source_rows = x.stratum(source)
    target_rows = x.stratum(target)
    n = x.lattice_rank
    transposed = RationalMatrix.from_columns([list(r) for r in source_rows], n) if source_rows else None
    rows = []
    for row in target_rows:
        if transposed is None:
            raise ValueError("Empty source stratum")
        coefficients = solve(transposed, list(row))
        if coefficients is None:
            raise ValueError("Target stratum is not a quotient of the source stratum")
        rows.append(list(coefficients))
    return RationalMatrix.from_rows(rows, len(source_rows))


def _check_cover(x: FaceComplex, gamma: Face, delta: Face) -> None:
    if gamma.index not in x.facets[delta.index]:
        raise NotCodimOneException(f"Face {gamma.index} is not a facet of face {delta.index}")


def sign(x: FaceComplex, gamma: Face, delta: Face) -> int:
    """
    sign(gamma, delta): n_delta = sign * n_gamma ∧ e_in, где e_in - направление внутрь delta.
    Для грани на бесконечности (sed gamma = sed delta + u) e_in = -u.
    """
    _check_cover(x, gamma, delta)
    m = delta.dim
    if gamma.sedentarity == delta.sedentarity:
        e_in = inward_direction(gamma, delta)
        columns = [_coordinates(delta.tangent_basis, t) for t in gamma.tangent_basis]
        columns.append(_coordinates(delta.tangent_basis, e_in))
        return sign_of(det(RationalMatrix.from_columns(columns, m)))
    extra = gamma.sedentarity - delta.sedentarity
    (u,) = tuple(extra)
    projection = stratum_projection(x, delta.sedentarity, gamma.sedentarity)
    rows = []
    if gamma.dim:
        columns = [_coordinates(gamma.tangent_basis, projection.apply(t)) for t in delta.tangent_basis]
        rows = [[columns[j][i] for j in range(m)] for i in range(gamma.dim)]
    u_stratum = _apply_rows(x.stratum(delta.sedentarity), x.rays[u])
    rows.append(list(_coordinates(delta.tangent_basis, u_stratum)))
    return -sign_of(det(RationalMatrix.from_rows(rows, m)))


def primitive_normal(x: FaceComplex, gamma: Face, delta: Face) -> tuple:
    """Примитивный вектор e_{delta/gamma} в N^gamma"""
    _check_cover(x, gamma, delta)
    if gamma.sedentarity != delta.sedentarity:
        raise NotCodimOneException("Primitive normals are defined for equal sedentarity only")
    rows = quotient_rows(gamma.tangent_basis, gamma.stratum_rank)
    return primitive([int(c) for c in _apply_rows(rows, inward_direction(gamma, delta))])


@frozen
class StarFan:
    """Звёздный веер грани: веер и соответствие конус -> кограница в комплексе"""
    fan: Fan
    base: int
    cone_faces: dict
    quotient: tuple

    def face_of(self, cone: Iterable[int]) -> int:
        return self.cone_faces[frozenset(cone)]

    def cone_of(self, face_index: int) -> frozenset:
        for cone, index in self.cone_faces.items():
            if index == face_index:
                return cone
        raise KeyError(f"Face {face_index} is not a coface of {self.base}")


def star_fan(x: FaceComplex, delta: Face) -> StarFan:
    cofaces = x.cofaces(delta.index)
    ray_faces = [i for i in cofaces if x.faces[i].dim == delta.dim + 1]
    rays = [primitive_normal(x, delta, x.faces[i]) for i in ray_faces]
    cone_faces = {}
    for i in cofaces:
        below = set(x.subfaces(i))
        cone = frozenset(k for k, r in enumerate(ray_faces) if r in below)
        cone_faces[cone] = i
    quotient = quotient_rows(delta.tangent_basis, delta.stratum_rank)
    fan = Fan(len(quotient), rays, sorted(cone_faces, key=lambda c: (len(c), sorted(c))))
    return StarFan(fan=fan, base=delta.index, cone_faces=cone_faces, quotient=quotient)


def fan_from_json(data: dict) -> Fan:
    complex_ = complex_from_json({**data, "vertices": []})
    cones = close_cones(f.rays for f in complex_.faces)
    fan = Fan(complex_.lattice_rank, complex_.rays, cones)
    check_fan(fan)
    return fan


def fan_to_json(fan: Fan) -> dict:
    return {
        "lattice_rank": fan.lattice_rank,
        "vertices": [],
        "rays": [list(r) for r in fan.rays],
        "faces": [{"vertices": [], "rays": sorted(c)} for c in fan.maximal_cones()],
    }


def project_to_stratum(x: FaceComplex, sedentarity: Iterable[int], vector: Sequence) -> tuple:
    """Образ вектора N_R в N / N_sigma"""
    return _apply_rows(x.stratum(frozenset(sedentarity)), vector)


def tangent_coordinates(face: Face, vector: Sequence) -> tuple:
    if not face.tangent_basis:
        if any(vector):
            raise ValueError("Vector outside the span of the basis")
        return ()
    return _coordinates(face.tangent_basis, vector)
