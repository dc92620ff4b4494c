import logging
from collections import deque
from itertools import combinations
from typing import Callable, Iterable, Sequence

from attrs import field, frozen
from sortedcontainers import SortedSet

from exceptions import MalformedInputException, NotSimpleException
from polyhedral import Fan

logger = logging.getLogger(__name__)

MAX_GROUND_SIZE = 20
AXIOM_CHECK_SIZE = 12


@frozen
class Matroid:
    """
    Матроид на множестве {0, ..., size-1}, заданный оракулом ранга
    """
    size: int
    rank_fn: Callable = field(eq=False)
    name: str = ""

    @classmethod
    def uniform(cls, n: int, r: int) -> "Matroid":
        if not 0 <= r <= n:
            raise MalformedInputException(f"Uniform matroid U_{r},{n} needs 0 <= r <= n")
        return cls(n, lambda subset: min(len(subset), r), f"U_{r},{n}")

    @classmethod
    def boolean(cls, n: int) -> "Matroid":
        return cls(n, len, f"B_{n}")

    @classmethod
    def graphic(cls, edges: Sequence[Sequence[int]]) -> "Matroid":
        edges = [tuple(int(v) for v in e) for e in edges]
        for edge in edges:
            if len(edge) != 2:
                raise MalformedInputException(f"Edge {edge} must have two endpoints")

        def graphic_rank(subset: Iterable[int]) -> int:
            parent: dict = {}

            def find(v):
                while parent.setdefault(v, v) != v:
                    parent[v] = parent[parent[v]]
                    v = parent[v]
                return v

            result = 0
            for e in subset:
                a, b = find(edges[e][0]), find(edges[e][1])
                if a != b:
                    parent[a] = b
                    result += 1
            return result

        return cls(len(edges), graphic_rank, f"M(G) with {len(edges)} edges")

    @classmethod
    def from_bases(cls, n: int, bases: Sequence[Sequence[int]]) -> "Matroid":
        bases = [frozenset(int(e) for e in b) for b in bases]
        if not bases:
            raise MalformedInputException("A matroid needs at least one basis")
        if len({len(b) for b in bases}) != 1:
            raise MalformedInputException("Bases of different sizes")
        if any(e < 0 or e >= n for b in bases for e in b):
            raise MalformedInputException("Basis element outside the ground set")
        matroid = cls(n, lambda subset: max(len(set(subset) & b) for b in bases), f"bases on {n}")
        if not matroid.check_axioms():
            raise MalformedInputException(f"Bases on {n} elements do not satisfy the exchange axiom")
        return matroid

    @property
    def ground(self) -> tuple:
        return tuple(range(self.size))

    def rank(self, subset: Iterable[int] = None) -> int:
        if subset is None:
            subset = self.ground
        return self.rank_fn(frozenset(subset))

    def closure(self, subset: Iterable[int]) -> frozenset:
        subset = frozenset(subset)
        r = self.rank(subset)
        return subset | frozenset(e for e in self.ground if e not in subset and self.rank(subset | {e}) == r)

    def is_simple(self) -> bool:
        if any(self.rank({e}) != 1 for e in self.ground):
            return False
        if self.rank() <= 1:
            return True
        return all(self.rank(pair) == 2 for pair in combinations(self.ground, 2))

    def check_axioms(self) -> bool:
        """Проверка аксиом ранга на всех подмножествах (только для |E| <= 12)"""
        if self.size > AXIOM_CHECK_SIZE:
            logger.warning(f"Skipping axiom check for {self.name}: ground set too large")
            return True
        subsets = [frozenset(c) for k in range(self.size + 1) for c in combinations(self.ground, k)]
        ranks = {s: self.rank(s) for s in subsets}
        if ranks[frozenset()] != 0:
            return False
        for s in subsets:
            for e in self.ground:
                if e in s:
                    continue
                step = ranks[s | {e}] - ranks[s]
                if step not in (0, 1):
                    return False
        # локальная субмодулярность r(S+e) + r(S+f) >= r(S+e+f) + r(S) равносильна полной
        for s in subsets:
            for e, f in combinations([x for x in self.ground if x not in s], 2):
                if ranks[s | {e}] + ranks[s | {f}] < ranks[s | {e, f}] + ranks[s]:
                    return False
        return True


@frozen
class FlatLattice:
    flats: tuple
    ranks: tuple

    def proper_flats(self) -> list[frozenset]:
        top = max(self.ranks)
        return [f for f, r in zip(self.flats, self.ranks) if 0 < r < top]

    def of_rank(self, r: int) -> list[frozenset]:
        return [f for f, rank in zip(self.flats, self.ranks) if rank == r]


def _flat_order(flat: frozenset) -> tuple:
    return len(flat), tuple(sorted(flat))


def flats(m: Matroid) -> FlatLattice:
    """
    Все флэты: обход вверх по покрытиям от замыкания пустого множества
    """
    if m.size > MAX_GROUND_SIZE:
        raise MalformedInputException(f"Ground set of size {m.size} exceeds {MAX_GROUND_SIZE}")
    if not m.is_simple():
        raise NotSimpleException(f"Matroid {m.name} has loops or parallel elements")
    bottom = m.closure(())
    seen = {bottom}
    queue = deque([bottom])
    while queue:
        flat = queue.popleft()
        for e in m.ground:
            if e in flat:
                continue
            upper = m.closure(flat | {e})
            if upper not in seen:
                seen.add(upper)
                queue.append(upper)
    ordered = sorted(seen, key=lambda f: (m.rank(f), _flat_order(f)))
    logger.debug(f"{m.name}: {len(ordered)} flats")
    return FlatLattice(tuple(ordered), tuple(m.rank(f) for f in ordered))


def flat_vector(flat: Iterable[int], size: int) -> tuple:
    """e_F в Z^E / Z e_E: последняя координата выражается через остальные"""
    vector = [0] * (size - 1)
    for e in flat:
        if e == size - 1:
            vector = [c - 1 for c in vector]
        else:
            vector[e] += 1
    return tuple(vector)


def bergman_fan(m: Matroid) -> Fan:
    lattice = flats(m)
    proper = lattice.proper_flats()
    rays = [flat_vector(f, m.size) for f in proper]
    position = {f: i for i, f in enumerate(proper)}
    cones = SortedSet(key=lambda c: (len(c), sorted(c)))
    cones.add(frozenset())
    chains = [(f,) for f in proper]
    while chains:
        extended = []
        for chain in chains:
            cones.add(frozenset(position[f] for f in chain))
            for f in proper:
                if chain[-1] < f:
                    extended.append(chain + (f,))
        chains = extended
    fan = Fan(max(m.size - 1, 0), rays, list(cones))
    logger.info(f"Bergman fan of {m.name}: {len(rays)} rays, {len(cones)} cones, dim {fan.dim}")
    return fan


def matroid_from_json(data: dict) -> Matroid:
    try:
        kind = data["type"]
        if kind == "uniform":
            return Matroid.uniform(int(data["n"]), int(data["r"]))
        if kind == "boolean":
            return Matroid.boolean(int(data["n"]))
        if kind == "graphic":
            return Matroid.graphic(data["edges"])
        if kind == "bases":
            return Matroid.from_bases(int(data["ground"]), data["bases"])
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedInputException(f"Matroid schema violated: {e}")
    raise MalformedInputException(f"Unknown matroid type: {data.get('type')!r}")
