import logging
import random
from fractions import Fraction
from typing import Optional, Sequence

from attrs import field, frozen

from exact_la import (
    Cohomology,
    GradedComplex,
    RationalMatrix,
    block_matrix,
    image_basis,
    induced_map,
    inverse,
    kernel_basis,
    rank,
    solve,
    span_rank,
)
from exceptions import ChaseFailureException, HLFailureException
from steenbrink import (
    SteenbrinkPage,
    cokernel_complex,
    cokernel_projection,
    kernel_complex,
    kernel_inclusion,
    verify_hl,
)

logger = logging.getLogger(__name__)

MAX_RANDOM_DIM = 6


@frozen(hash=False)
class LefschetzTriple:
    """Комплексы C, D и отображение L: C^j -> D^{j+2}"""
    c: GradedComplex
    d: GradedComplex
    l: dict

    def l_matrix(self, j: int) -> RationalMatrix:
        matrix = self.l.get(j)
        if matrix is None:
            return RationalMatrix.zeros(self.d.dim(j + 2), self.c.dim(j))
        return matrix

    def degrees(self) -> range:
        present = self.c.degrees() + [m - 2 for m in self.d.degrees()]
        if not present:
            return range(0)
        return range(min(present), max(present) + 1)


@frozen
class Junction:
    label: str
    dim: int
    incoming_rank: int
    outgoing_kernel: int
    composite_zero: bool

    @property
    def ok(self) -> bool:
        return self.composite_zero and self.incoming_rank == self.outgoing_kernel


@frozen
class Comparison:
    """Размерность H^n(ker N) или H^n(coker N) против H^n(K) или H^n(R)"""
    label: str
    expected: int
    found: int

    @property
    def ok(self) -> bool:
        return self.expected == self.found


@frozen(hash=False)
class ExactnessReport:
    junctions: tuple
    comparisons: tuple = ()
    d0: Optional[RationalMatrix] = field(default=None, eq=False)

    @property
    def ok(self) -> bool:
        return all(j.ok for j in self.junctions) and all(c.ok for c in self.comparisons)

    def failed(self) -> list[Junction]:
        return [j for j in self.junctions if not j.ok]


def check_chain_map(t: LefschetzTriple) -> bool:
    for j in t.degrees():
        left = t.d.differential(j + 2) @ t.l_matrix(j)
        right = t.l_matrix(j + 1) @ t.c.differential(j)
        if not (left - right).is_zero():
            return False
    return True


def check_hl(t: LefschetzTriple) -> dict:
    """
    L инъективно в степенях j <= -1 и сюръективно в степенях j >= -1,
    на уровне комплексов и на уровне когомологий
    """
    report = {}
    for j in t.degrees():
        matrix = t.l_matrix(j)
        on_cohomology = induced_map(matrix, t.c.cohomology(j), t.d.cohomology(j + 2))
        for level, m in (("complex", matrix), ("cohomology", on_cohomology)):
            r = rank(m)
            flag = True
            if j <= -1:
                flag = flag and r == m.cols
            if j >= -1:
                flag = flag and r == m.rows
            report[(level, j)] = flag
    return report


@frozen(hash=False)
class KernelCokernel:
    """
    K = ker L (столбцы inclusion[j] - базис K^j в C^j) и R = coker L
    (projection[m]: D^m -> R^m, section[m]: R^m -> D^m)
    """
    k: GradedComplex
    r: GradedComplex
    inclusion: dict
    projection: dict
    section: dict


def _complement(image: Sequence[Sequence], n: int) -> list[int]:
    chosen = []
    columns = list(image)
    current = span_rank(columns, n)
    for i in range(n):
        if current == n:
            break
        unit = [Fraction(int(k == i)) for k in range(n)]
        if span_rank(columns + [unit], n) > current:
            columns.append(unit)
            chosen.append(i)
            current += 1
    return chosen


def kernel_and_cokernel(t: LefschetzTriple) -> KernelCokernel:
    degrees = t.degrees()
    inclusion, k_dims = {}, {}
    for j in degrees:
        basis = kernel_basis(t.l_matrix(j)).basis if t.c.dim(j) else ()
        inclusion[j] = RationalMatrix.from_columns(basis, t.c.dim(j))
        k_dims[j] = len(basis)
    k_differentials = {}
    for j in degrees:
        if not k_dims[j] or not k_dims.get(j + 1):
            continue
        image = t.c.differential(j) @ inclusion[j]
        columns = []
        for column in image.columns():
            coordinates = solve(inclusion[j + 1], column)
            if coordinates is None:
                raise ChaseFailureException(f"Differential of C leaves ker L in degree {j}")
            columns.append(coordinates)
        k_differentials[j] = RationalMatrix.from_columns(columns, k_dims[j + 1])

    projection, section, r_dims = {}, {}, {}
    for j in degrees:
        m = j + 2
        n = t.d.dim(m)
        image = image_basis(t.l_matrix(j)).basis if n else ()
        units = _complement(image, n)
        r_dims[m] = len(units)
        section[m] = RationalMatrix(n, len(units), {(i, column): 1 for column, i in enumerate(units)})
        if not n:
            projection[m] = RationalMatrix.zeros(0, 0)
            continue
        square = RationalMatrix.from_columns(
            [[Fraction(int(k == i)) for k in range(n)] for i in units] + list(image), n
        )
        projection[m] = inverse(square).submatrix(list(range(len(units))), list(range(n)))
    r_differentials = {}
    for j in degrees:
        m = j + 2
        if r_dims[m] and r_dims.get(m + 1):
            r_differentials[m] = projection[m + 1] @ t.d.differential(m) @ section[m]
    return KernelCokernel(
        k=GradedComplex(k_dims, k_differentials),
        r=GradedComplex(r_dims, r_differentials),
        inclusion=inclusion,
        projection=projection,
        section=section,
    )


def connecting_map(t: LefschetzTriple, kc: KernelCokernel, lift: Optional[Sequence[Sequence]] = None) -> RationalMatrix:
    """
    d^0: H^0(R) -> H^0(K) обходом диаграммы: r -> c = S r (+ L w) -> c' = d_D c ->
    b' = L^{-1} c' -> b'' = d_C b' ∈ ker L -> класс в H^0(K).
    lift - необязательные векторы w ∈ C^{-2}, по одному на представителя, для другого подъёма.
    """
    source = kc.r.cohomology(0)
    target = kc.k.cohomology(0)
    l_minus = t.l_matrix(-1)
    if rank(l_minus) != l_minus.cols:
        raise ChaseFailureException("L is not injective in degree -1, the preimage is not unique")
    columns = []
    for position, r in enumerate(source.representatives):
        c = list(kc.section[0].apply(r))
        if lift is not None:
            shift = t.l_matrix(-2).apply(lift[position])
            c = [ci + si for ci, si in zip(c, shift)]
        c_prime = t.d.differential(0).apply(c)
        b_prime = solve(l_minus, c_prime)
        if b_prime is None:
            raise ChaseFailureException("d_D c has no preimage under L")
        b_second = t.c.differential(-1).apply(b_prime)
        if any(t.l_matrix(0).apply(b_second)):
            raise ChaseFailureException("d_C b' is not in the kernel of L")
        k_vector = solve(kc.inclusion[0], b_second) if kc.k.dim(0) else ()
        if k_vector is None:
            raise ChaseFailureException("d_C b' is not in the chosen basis of K^0")
        columns.append(target.coordinates(k_vector))
    return RationalMatrix.from_columns(columns, target.dim)


def _junction(label: str, dim: int, incoming: RationalMatrix, outgoing: RationalMatrix) -> Junction:
    return Junction(
        label=label,
        dim=dim,
        incoming_rank=rank(incoming),
        outgoing_kernel=dim - rank(outgoing),
        composite_zero=(outgoing @ incoming).is_zero(),
    )


def clemens_schmid_sequences(t: LefschetzTriple, lift: Optional[Sequence[Sequence]] = None,
                             label: str = "") -> ExactnessReport:
    """
    Две длинные последовательности (по чётности n):
    H^n(K) -> H^n(C) -> H^{n+2}(D) -> H^{n+2}(R) -> H^{n+2}(K) -> ...
    """
    if not check_chain_map(t):
        raise HLFailureException("L does not commute with the differentials")
    hl = check_hl(t)
    if not all(hl.values()):
        failed = sorted(key for key, flag in hl.items() if not flag)
        logger.warning(f"Hard Lefschetz around 0 fails at {failed}")
        raise HLFailureException(f"Hard Lefschetz around 0 fails at {failed}")
    kc = kernel_and_cokernel(t)
    d0 = connecting_map(t, kc, lift)
    degrees = t.degrees()
    if not degrees:
        return ExactnessReport((), d0=d0)

    hk = {n: kc.k.cohomology(n) for n in range(degrees.start - 4, degrees.stop + 4)}
    hc = {n: t.c.cohomology(n) for n in hk}
    hd = {n: t.d.cohomology(n) for n in hk}
    hr = {n: kc.r.cohomology(n) for n in hk}

    def zero(source: Cohomology, target: Cohomology) -> RationalMatrix:
        return RationalMatrix.zeros(target.dim, source.dim)

    def inclusion_map(n: int) -> RationalMatrix:
        chain = kc.inclusion.get(n) or RationalMatrix.zeros(t.c.dim(n), kc.k.dim(n))
        return induced_map(chain, hk[n], hc[n])

    def l_map(n: int) -> RationalMatrix:
        return induced_map(t.l_matrix(n), hc[n], hd[n + 2])

    def projection_map(m: int) -> RationalMatrix:
        chain = kc.projection.get(m)
        if chain is None or (chain.rows, chain.cols) != (kc.r.dim(m), t.d.dim(m)):
            chain = RationalMatrix.zeros(kc.r.dim(m), t.d.dim(m))
        return induced_map(chain, hd[m], hr[m])

    def delta_map(m: int) -> RationalMatrix:
        return d0 if m == 0 else zero(hr[m], hk[m])

    junctions = []
    for parity in (0, 1):
        start = degrees.start - 2 - ((degrees.start - parity) % 2)
        objects, maps = [], []
        for n in range(start, degrees.stop + 2, 2):
            objects += [(f"H^{n}(K)", hk[n].dim), (f"H^{n}(C)", hc[n].dim),
                        (f"H^{n + 2}(D)", hd[n + 2].dim), (f"H^{n + 2}(R)", hr[n + 2].dim)]
            maps += [inclusion_map(n), l_map(n), projection_map(n + 2), delta_map(n + 2)]
        for i in range(1, len(objects) - 1):
            name, dim = objects[i]
            junctions.append(_junction(f"{label}{name}", dim, maps[i - 1], maps[i]))
    report = ExactnessReport(tuple(junctions), d0=d0)
    if not report.ok:
        logger.warning(f"Exactness fails at {[j.label for j in report.failed()]}")
    return report


def _random_unimodular(rng: random.Random, n: int) -> RationalMatrix:
    rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(2 * n):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        factor = rng.randint(-2, 2)
        rows[i] = [a + factor * b for a, b in zip(rows[i], rows[j])]
    return RationalMatrix.from_rows(rows, n)


@frozen
class _Pieces:
    """Прямая сумма одиночных классов и пар ℚ -> ℚ (тождество) по степеням"""
    dims: dict
    arrows: tuple
    classes: dict

    def complex(self) -> GradedComplex:
        differentials = {}
        for m in self.dims:
            if m + 1 not in self.dims:
                continue
            entries = {(target, source): 1 for degree, source, target in self.arrows if degree == m}
            differentials[m] = RationalMatrix(self.dims[m + 1], self.dims[m], entries)
        return GradedComplex(dict(self.dims), differentials)


def _random_pieces(rng: random.Random, low: int, high: int, max_dim: int) -> _Pieces:
    dims = {m: 0 for m in range(low, high + 1)}
    classes = {m: [] for m in dims}
    arrows = []
    for m in range(low, high + 1):
        for _ in range(rng.randint(0, 2)):
            if dims[m] < max_dim:
                classes[m].append(dims[m])
                dims[m] += 1
        if m < high and dims[m] < max_dim and dims[m + 1] < max_dim and rng.random() < 0.5:
            arrows.append((m, dims[m], dims[m + 1]))
            dims[m] += 1
            dims[m + 1] += 1
    return _Pieces(dims, tuple(arrows), classes)


def _random_matrix(rng: random.Random, rows: int, cols: int) -> RationalMatrix:
    return RationalMatrix.from_rows([[rng.randint(-2, 2) for _ in range(cols)] for _ in range(rows)], cols)


def random_lefschetz_triple(rng: random.Random) -> LefschetzTriple:
    """
    Случайная тройка с HL вокруг 0: D = W ⊕ Q, C^j = W^{j+2} ⊕ K^j, L - проекция на W.
    Q живёт в степенях <= 0, K - в степенях >= 0; расширение e: Q^0 -> W^1 и
    ξ: W^1 -> K^0 дают ненулевое d^0 = ξ e.
    """
    half = MAX_RANDOM_DIM // 2
    w = _random_pieces(rng, -2, 4, half)
    q = _random_pieces(rng, -2, 0, half)
    k = _random_pieces(rng, 0, 2, half)
    w_complex, q_complex, k_complex = w.complex(), q.complex(), k.complex()

    cap = min(len(w.classes[1]), len(q.classes[0]), len(k.classes[0]))
    g = rng.randint(min(1, cap), cap)
    extension = RationalMatrix(w.dims[1], q.dims[0], {(w.classes[1][i], q.classes[0][i]): 1 for i in range(g)})
    xi = RationalMatrix(k.dims[0], w.dims[1], {(k.classes[0][i], w.classes[1][i]): 1 for i in range(g)})

    h = {j: _random_matrix(rng, k.dims[j], w.dims[j + 2]) for j in range(0, 3)}

    def h_matrix(j: int) -> RationalMatrix:
        return h.get(j) or RationalMatrix.zeros(k_complex.dim(j), w_complex.dim(j + 2))

    def phi(j: int) -> RationalMatrix:
        if j == -1:
            return xi - h_matrix(0) @ w_complex.differential(1)
        return k_complex.differential(j) @ h_matrix(j) - h_matrix(j + 1) @ w_complex.differential(j + 2)

    c_degrees = range(-4, 3)
    d_degrees = range(-2, 5)
    c_sizes = {j: (w_complex.dim(j + 2), k_complex.dim(j)) for j in c_degrees}
    d_sizes = {m: (w_complex.dim(m), q_complex.dim(m)) for m in d_degrees}

    c_differentials = {}
    for j in c_degrees:
        if j + 1 not in c_sizes:
            continue
        blocks = {(0, 0): w_complex.differential(j + 2), (1, 1): k_complex.differential(j)}
        if j >= -1:
            blocks[(1, 0)] = phi(j)
        c_differentials[j] = block_matrix(blocks, c_sizes[j + 1], c_sizes[j])
    d_differentials = {}
    for m in d_degrees:
        if m + 1 not in d_sizes:
            continue
        blocks = {(0, 0): w_complex.differential(m), (1, 1): q_complex.differential(m)}
        if m == 0:
            blocks[(0, 1)] = extension
        d_differentials[m] = block_matrix(blocks, d_sizes[m + 1], d_sizes[m])
    l_maps = {}
    for j in c_degrees:
        if j + 2 in d_sizes:
            identity = RationalMatrix.identity(w_complex.dim(j + 2))
            l_maps[j] = block_matrix({(0, 0): identity}, d_sizes[j + 2], c_sizes[j])

    c_change = {j: _random_unimodular(rng, sum(c_sizes[j])) for j in c_degrees}
    d_change = {m: _random_unimodular(rng, sum(d_sizes[m])) for m in d_degrees}
    c_inverse = {j: inverse(p) if p.rows else p for j, p in c_change.items()}
    d_inverse = {m: inverse(p) if p.rows else p for m, p in d_change.items()}
    c = GradedComplex(
        {j: sum(c_sizes[j]) for j in c_degrees},
        {j: c_change[j + 1] @ matrix @ c_inverse[j] for j, matrix in c_differentials.items()},
    )
    d = GradedComplex(
        {m: sum(d_sizes[m]) for m in d_degrees},
        {m: d_change[m + 1] @ matrix @ d_inverse[m] for m, matrix in d_differentials.items()},
    )
    l_changed = {j: d_change[j + 2] @ matrix @ c_inverse[j] for j, matrix in l_maps.items()}
    logger.debug(f"Random triple: C dims {c.dims}, D dims {d.dims}, d0 rank {g}")
    return LefschetzTriple(c, d, l_changed)


def tropical_triple(st: SteenbrinkPage, b: int) -> LefschetzTriple:
    """(C, D, L) = (ST^{•,b}, ST^{•,b-2}, N)"""
    c = st.row_complex(b)
    d = st.row_complex(b - 2)
    degrees = range(-st.dim - 1, st.dim + 2)
    l_maps = {j: st.n_matrix(j, b) for j in degrees if c.dim(j) and d.dim(j + 2)}
    return LefschetzTriple(c, d, l_maps)


def tropical_clemens_schmid(st: SteenbrinkPage) -> ExactnessReport:
    """
    ... -> H_s -> H(X) -N-> H(X) -> H_rel -> ... для всех чётных b,
    с K = K^{•,b} и R = R^{•,b-2}
    """
    if not verify_hl(st).ok:
        raise HLFailureException("Tropical Clemens-Schmid needs Hard Lefschetz on the Steenbrink page")
    junctions, comparisons = [], []
    for b in range(0, 2 * st.dim + 3, 2):
        t = tropical_triple(st, b)
        report = clemens_schmid_sequences(t, label=f"b={b}: ")
        kc = kernel_and_cokernel(t)
        surviving = kernel_complex(st, b)
        relative = cokernel_complex(st, b - 2)
        for n in t.degrees():
            comparisons.append(Comparison(
                f"b={b}: H^{n}(ker N) = H^{n}(K)", kc.k.cohomology(n).dim, surviving.cohomology(n).dim
            ))
            comparisons.append(Comparison(
                f"b={b - 2}: H^{n + 2}(coker N) = H^{n + 2}(R)", kc.r.cohomology(n + 2).dim,
                relative.cohomology(n + 2).dim,
            ))
        junctions.extend(report.junctions)
    result = ExactnessReport(tuple(junctions), tuple(comparisons))
    for c in result.comparisons:
        if not c.ok:
            logger.warning(f"{c.label} fails: {c.expected} != {c.found}")
    logger.info(f"Tropical Clemens-Schmid: {len(junctions)} junctions, {len(comparisons)} comparisons, ok={result.ok}")
    return result


@frozen
class ConeDegree:
    degree: int
    cone_dim: int
    relative_dim: int
    projection_rank: int

    @property
    def ok(self) -> bool:
        return self.cone_dim == self.relative_dim == self.projection_rank


@frozen
class MappingConeReport:
    b: int
    squares_to_zero: bool
    degrees: tuple

    @property
    def ok(self) -> bool:
        return self.squares_to_zero and all(d.ok for d in self.degrees)


def mapping_cone(st: SteenbrinkPage, b: int) -> tuple[GradedComplex, dict]:
    """
    T^m = K^{m,b+2} ⊕ ST^{m-1,b+2} ⊕ ST^{m,b},
    d(x1, x2, x3) = (d x1, ι x1 - d x2, N x2 + d x3); возвращает T и проекции T^m -> R^{m,b}
    """
    k = kernel_complex(st, b + 2)
    degrees = range(-st.dim - 2, st.dim + 3)

    def sizes(m: int) -> tuple:
        return k.dim(m), st.row_dim(m - 1, b + 2), st.row_dim(m, b)

    differentials = {}
    for m in degrees:
        source, target = sizes(m), sizes(m + 1)
        if not sum(source) or not sum(target):
            continue
        blocks = {
            (0, 0): k.differential(m),
            (1, 1): -st.differential(m - 1, b + 2),
            (2, 1): st.n_matrix(m - 1, b + 2),
            (2, 2): st.differential(m, b),
        }
        if k.dim(m):
            blocks[(1, 0)] = kernel_inclusion(st, m, b + 2)
        differentials[m] = block_matrix(blocks, target, source)
    t = GradedComplex({m: sum(sizes(m)) for m in degrees}, differentials)
    projections = {}
    for m in degrees:
        source = sizes(m)
        projection = cokernel_projection(st, m, b)
        projections[m] = block_matrix({(0, 2): projection}, (projection.rows,), source)
    return t, projections


def mapping_cone_check(st: SteenbrinkPage, b: int) -> MappingConeReport:
    t, projections = mapping_cone(st, b)
    relative = cokernel_complex(st, b)
    degrees = []
    for m in sorted(projections):
        source = t.cohomology(m)
        target = relative.cohomology(m)
        induced = induced_map(projections[m], source, target)
        degrees.append(ConeDegree(m, source.dim, target.dim, rank(induced)))
    report = MappingConeReport(b, t.squares_to_zero(), tuple(degrees))
    if not report.ok:
        logger.warning(f"Mapping cone for b={b} is not quasi-isomorphic to R")
    return report
