import logging
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Optional, Sequence

from attrs import field, frozen
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError
from sympy.polys.matrices.normalforms import hermite_normal_form, smith_normal_form

from exceptions import NotASubspaceException

logger = logging.getLogger(__name__)

Vector = tuple[Fraction, ...]


def _clean_entries(entries: Mapping[tuple[int, int], object]) -> dict:
    return {key: Fraction(value) for key, value in entries.items() if value != 0}


def to_vector(values: Iterable) -> Vector:
    return tuple(Fraction(v) for v in values)


def zero_vector(n: int) -> Vector:
    return tuple(Fraction(0) for _ in range(n))


def _to_qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def _from_domain_element(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def _domain_entries(dm: DomainMatrix) -> dict:
    """Ненулевые элементы DomainMatrix как {(i, j): Fraction}"""
    entries = {}
    for i, row in dm.to_sparse().rep.items():
        for j, value in row.items():
            if value:
                entries[(i, j)] = _from_domain_element(value)
    return entries


@frozen(hash=False)
class RationalMatrix:
    """Разреженная матрица над ℚ; вычисления идут через DomainMatrix над QQ"""
    rows: int
    cols: int
    entries: dict = field(converter=_clean_entries, factory=dict)

    def __attrs_post_init__(self):
        for (i, j) in self.entries:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise IndexError(f"Entry {(i, j)} outside a {self.rows}x{self.cols} matrix")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "RationalMatrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != cols:
                raise ValueError("Ragged rows")
            for j, value in enumerate(row):
                if value != 0:
                    entries[(i, j)] = value
        return cls(len(rows), cols, entries)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "RationalMatrix":
        entries = {}
        for j, column in enumerate(columns):
            if len(column) != rows:
                raise ValueError("Column of wrong length")
            for i, value in enumerate(column):
                if value != 0:
                    entries[(i, j)] = value
        return cls(rows, len(columns), entries)

    @classmethod
    def from_domain(cls, dm: DomainMatrix) -> "RationalMatrix":
        rows, cols = dm.shape
        return cls(rows, cols, _domain_entries(dm))

    def to_domain(self) -> DomainMatrix:
        rep: dict = {}
        for (i, j), value in self.entries.items():
            rep.setdefault(i, {})[j] = _to_qq(value)
        return DomainMatrix(rep, (self.rows, self.cols), QQ)

    def get(self, i: int, j: int) -> Fraction:
        return self.entries.get((i, j), Fraction(0))

    def to_rows(self) -> list[list[Fraction]]:
        dense = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), value in self.entries.items():
            dense[i][j] = value
        return dense

    def column(self, j: int) -> Vector:
        return tuple(self.get(i, j) for i in range(self.rows))

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def is_zero(self) -> bool:
        return not self.entries

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def apply(self, vector: Sequence) -> Vector:
        if len(vector) != self.cols:
            raise ValueError(f"Vector of length {len(vector)} for {self.cols} columns")
        result = [Fraction(0)] * self.rows
        for (i, j), value in self.entries.items():
            if vector[j]:
                result[i] += value * vector[j]
        return tuple(result)

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"Shapes {self.rows}x{self.cols} and {other.rows}x{other.cols} do not compose")
        if self.is_zero() or other.is_zero():
            return RationalMatrix.zeros(self.rows, other.cols)
        return RationalMatrix.from_domain(self.to_domain().matmul(other.to_domain()))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self.matmul(other)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("Shapes differ")
        entries = dict(self.entries)
        for key, value in other.entries.items():
            entries[key] = entries.get(key, Fraction(0)) + value
        return RationalMatrix(self.rows, self.cols, entries)

    def scale(self, factor) -> "RationalMatrix":
        factor = Fraction(factor)
        return RationalMatrix(self.rows, self.cols, {k: v * factor for k, v in self.entries.items()})

    def __neg__(self) -> "RationalMatrix":
        return self.scale(-1)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + (-other)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RationalMatrix":
        row_pos = {r: a for a, r in enumerate(rows)}
        col_pos = {c: b for b, c in enumerate(cols)}
        entries = {}
        for (i, j), value in self.entries.items():
            if i in row_pos and j in col_pos:
                entries[(row_pos[i], col_pos[j])] = value
        return RationalMatrix(len(rows), len(cols), entries)


def block_matrix(blocks: Mapping[tuple[int, int], RationalMatrix],
                 row_sizes: Sequence[int], col_sizes: Sequence[int]) -> RationalMatrix:
    """
    Сборка матрицы из блоков; отсутствующие блоки считаются нулевыми
    """
    row_offsets = [0]
    for size in row_sizes:
        row_offsets.append(row_offsets[-1] + size)
    col_offsets = [0]
    for size in col_sizes:
        col_offsets.append(col_offsets[-1] + size)
    entries = {}
    for (bi, bj), block in blocks.items():
        if (block.rows, block.cols) != (row_sizes[bi], col_sizes[bj]):
            raise ValueError(f"Block {(bi, bj)} has shape {block.rows}x{block.cols}")
        for (i, j), value in block.entries.items():
            entries[(row_offsets[bi] + i, col_offsets[bj] + j)] = value
    return RationalMatrix(row_offsets[-1], col_offsets[-1], entries)


@frozen
class Subspace:
    ambient_dim: int
    basis: tuple = field(converter=lambda vectors: tuple(to_vector(v) for v in vectors))

    def __attrs_post_init__(self):
        for vector in self.basis:
            if len(vector) != self.ambient_dim:
                raise ValueError("Basis vector of wrong length")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def as_matrix(self) -> RationalMatrix:
        """Базисные векторы как столбцы"""
        return RationalMatrix.from_columns(self.basis, self.ambient_dim)

    def coordinates(self, vector: Sequence) -> Optional[Vector]:
        return solve(self.as_matrix(), vector)

    def contains(self, vector: Sequence) -> bool:
        return self.coordinates(vector) is not None


def rref(m: RationalMatrix) -> tuple[list[dict], list[int]]:
    """
    Приведённый ступенчатый вид (Гаусс-Жордан над QQ): ненулевые строки как словари
    {столбец: значение} и список опорных столбцов
    """
    if m.is_zero():
        return [], []
    reduced, pivots = m.to_domain().rref()
    rows: list[dict] = [{} for _ in pivots]
    for (i, j), value in _domain_entries(reduced).items():
        if i < len(rows):
            rows[i][j] = value
    return rows, list(pivots)


def rank(m: RationalMatrix) -> int:
    if m.is_zero():
        return 0
    return m.to_domain().rank()


def kernel_basis(m: RationalMatrix) -> Subspace:
    if m.is_zero():
        return Subspace(m.cols, [[Fraction(int(i == j)) for j in range(m.cols)] for i in range(m.cols)])
    dm = m.to_domain()
    if dm.rank() == m.cols:
        return Subspace(m.cols, [])
    null = RationalMatrix.from_domain(dm.nullspace())
    return Subspace(m.cols, null.to_rows())


def image_basis(m: RationalMatrix) -> Subspace:
    _, pivots = rref(m)
    return Subspace(m.rows, [m.column(j) for j in pivots])


def solve(m: RationalMatrix, b: Sequence) -> Optional[Vector]:
    """
    Частное решение m x = b: свободные переменные равны нулю, None при несовместности
    """
    if len(b) != m.rows:
        raise ValueError(f"Right-hand side of length {len(b)} for {m.rows} rows")
    if m.is_zero():
        return zero_vector(m.cols) if not any(b) else None
    rhs = RationalMatrix.from_columns([b], m.rows).to_domain()
    reduced, pivots = m.to_domain().hstack(rhs).rref()
    if pivots and pivots[-1] == m.cols:
        return None
    entries = _domain_entries(reduced)
    solution = [Fraction(0)] * m.cols
    for i, pivot in enumerate(pivots):
        solution[pivot] = entries.get((i, m.cols), Fraction(0))
    return tuple(solution)


def span_rank(vectors: Sequence[Sequence], ambient_dim: int) -> int:
    if not vectors:
        return 0
    return rank(RationalMatrix.from_rows([list(v) for v in vectors], ambient_dim))


def independent_subset(vectors: Sequence[Sequence], ambient_dim: int) -> list[int]:
    """Индексы жадно выбранных линейно независимых векторов"""
    if not vectors:
        return []
    return rref(RationalMatrix.from_columns(vectors, ambient_dim))[1]


def quotient_dim(ambient: Subspace, sub: Subspace) -> int:
    if ambient.ambient_dim != sub.ambient_dim:
        raise NotASubspaceException("Subspaces live in different ambient spaces")
    together = span_rank(list(ambient.basis) + list(sub.basis), ambient.ambient_dim)
    if together != span_rank(ambient.basis, ambient.ambient_dim):
        raise NotASubspaceException("Subspace is not contained in the ambient space")
    return ambient.dim - span_rank(sub.basis, sub.ambient_dim)


def det(m: RationalMatrix) -> Fraction:
    if m.rows != m.cols:
        raise ValueError("Determinant of a non-square matrix")
    if not m.rows:
        return Fraction(1)
    if m.is_zero():
        return Fraction(0)
    return _from_domain_element(m.to_domain().det())


def inverse(m: RationalMatrix) -> RationalMatrix:
    if m.rows != m.cols:
        raise ValueError("Inverse of a non-square matrix")
    if not m.rows:
        return m
    try:
        return RationalMatrix.from_domain(m.to_domain().to_dense().inv())
    except DMNonInvertibleMatrixError:
        raise ZeroDivisionError("Matrix is not invertible")


def _integer_matrix(rows: Sequence[Sequence[int]], n: int) -> DomainMatrix:
    return DomainMatrix([[ZZ(int(c)) for c in row] for row in rows], (len(rows), n), ZZ)


def integer_kernel_basis(rows: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """
    Базис решётки целых решений A x = 0.
    Строки K рационального ядра насыщаются через эрмитову форму: K U = [H | 0], строки H^{-1} K - искомый базис.
    """
    if not n:
        return []
    a = RationalMatrix.from_rows([[Fraction(int(c)) for c in row] for row in rows], n)
    kernel = kernel_basis(a)
    if not kernel.dim:
        return []
    _, integral = RationalMatrix.from_rows(list(kernel.basis), n).to_domain().clear_denoms(convert=True)
    hermite = hermite_normal_form(integral.to_dense())
    saturated = hermite.convert_to(QQ).to_dense().inv().to_dense().matmul(integral.convert_to(QQ).to_dense())
    dense = RationalMatrix.from_domain(saturated).to_rows()
    logger.debug(f"Integer kernel in Z^{n} of rank {len(dense)}")
    return [tuple(int(value) for value in row) for row in dense]


def extends_to_lattice_basis(vectors: Sequence[Sequence[int]], n: int) -> bool:
    """Целые векторы дополняются до базиса Z^n: все инвариантные множители Смита равны ±1"""
    k = len(vectors)
    if not k:
        return True
    if k > n or span_rank(vectors, n) != k:
        return False
    invariants = _domain_entries(smith_normal_form(_integer_matrix(vectors, n)))
    return all(abs(value) == 1 for value in invariants.values())


def primitive(vector: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for value in vector:
        g = gcd(g, int(value))
    if g == 0:
        return tuple(int(v) for v in vector)
    return tuple(int(v) // g for v in vector)


@frozen(hash=False)
class Cohomology:
    """Когомологии комплекса в одной степени с выбранными представителями классов"""
    degree: int
    cocycles: Subspace
    coboundaries: Subspace
    representatives: tuple

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def coordinates(self, cocycle: Sequence) -> Vector:
        n = self.cocycles.ambient_dim
        columns = list(self.representatives) + list(self.coboundaries.basis)
        solution = solve(RationalMatrix.from_columns(columns, n), cocycle) if columns else (
            () if all(v == 0 for v in cocycle) else None
        )
        if solution is None:
            raise NotASubspaceException(f"Vector is not a cocycle in degree {self.degree}")
        return tuple(solution[: self.dim])

    def is_coboundary(self, cocycle: Sequence) -> bool:
        return all(c == 0 for c in self.coordinates(cocycle))


@frozen(hash=False)
class GradedComplex:
    """
    Ограниченный коцепной комплекс: размерности по степеням и d^k: C^k -> C^{k+1}
    """
    dims: dict
    differentials: dict = field(factory=dict)
    labels: dict = field(factory=dict)

    def __attrs_post_init__(self):
        for k, matrix in self.differentials.items():
            if (matrix.rows, matrix.cols) != (self.dim(k + 1), self.dim(k)):
                raise ValueError(
                    f"Differential in degree {k} has shape {matrix.rows}x{matrix.cols}, "
                    f"expected {self.dim(k + 1)}x{self.dim(k)}"
                )

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def degrees(self) -> list[int]:
        present = [k for k, n in self.dims.items() if n]
        if not present:
            return []
        return list(range(min(present), max(present) + 1))

    def differential(self, k: int) -> RationalMatrix:
        matrix = self.differentials.get(k)
        if matrix is None:
            return RationalMatrix.zeros(self.dim(k + 1), self.dim(k))
        return matrix

    def squares_to_zero(self) -> bool:
        return all(
            (self.differential(k + 1) @ self.differential(k)).is_zero()
            for k in self.degrees()
        )

    def cohomology(self, k: int) -> Cohomology:
        n = self.dim(k)
        cocycles = kernel_basis(self.differential(k)) if n else Subspace(0, [])
        coboundaries = image_basis(self.differential(k - 1)) if n else Subspace(0, [])
        chosen = list(coboundaries.basis)
        representatives = []
        current = len(chosen)
        for vector in cocycles.basis:
            if span_rank(chosen + [vector], n) > current:
                chosen.append(vector)
                representatives.append(vector)
                current += 1
        return Cohomology(k, cocycles, coboundaries, tuple(representatives))

    def cohomology_dims(self) -> dict[int, int]:
        result = {}
        for k in self.degrees():
            n = self.dim(k)
            result[k] = n - rank(self.differential(k)) - rank(self.differential(k - 1))
        return result


def induced_map(chain_map: RationalMatrix, source: Cohomology, target: Cohomology) -> RationalMatrix:
    """Матрица отображения на когомологиях в базисах представителей"""
    columns = [target.coordinates(chain_map.apply(rep)) for rep in source.representatives]
    return RationalMatrix.from_columns(columns, target.dim)
