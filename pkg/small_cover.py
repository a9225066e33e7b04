"""Real moment-angle complexes and small covers as finite quotients of a simple cell.

A simple cell P is given by its dual complex K (one vertex per facet of P, one
top simplex per vertex of P). A face of P is a simplex of K, the empty simplex
being P itself. Group elements of Z_2^r are bitmasks.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from sympy import GF, Matrix
from sympy.polys.matrices import DomainMatrix

from errors import InconsistentDegree, InvalidCharacteristic, RankDeficient, ToolkitError, ZeroDegreeInput
from simplicial import (
    AbstractComplex,
    OrientedPseudoManifold,
    Simplex,
    SimplicialMap,
    map_degree,
    permutation_sign,
    pseudo_manifold_report,
    validate_pseudo_manifold,
)

logger = logging.getLogger(__name__)


def popcount(g: int) -> int:
    return bin(g).count("1")


@dataclass(frozen=True)
class SimpleCellInput:
    complex: AbstractComplex
    pm: Optional[OrientedPseudoManifold]
    pm_error: Optional[str] = None

    @classmethod
    def of(cls, complex_: AbstractComplex) -> "SimpleCellInput":
        try:
            pm = validate_pseudo_manifold(complex_)
        except ToolkitError as exc:
            logger.warning(f"simple cell input is not a valid pseudo-manifold: {exc.detail}")
            return cls(complex=complex_, pm=None, pm_error=f"{type(exc).__name__}: {exc.detail}")
        return cls(complex=complex_, pm=pm)

    @property
    def m(self) -> int:
        return self.complex.vertex_count

    @property
    def n(self) -> int:
        return self.complex.dim + 1


def bits_to_mask(bits: Sequence[int]) -> int:
    return sum(1 << i for i, b in enumerate(bits) if b)


def mask_to_bits(g: int, rank: int) -> List[int]:
    return [g >> i & 1 for i in range(rank)]


def gf2_rank(vectors: Sequence[int], rank: int) -> int:
    if not vectors:
        return 0
    rows = [mask_to_bits(v, rank) for v in vectors]
    return DomainMatrix.from_Matrix(Matrix(rows)).convert_to(GF(2)).rank()


def characteristic_defects(cell: SimpleCellInput, values: Sequence[int], rank: int) -> List[Simplex]:
    if len(values) != cell.m:
        raise InvalidCharacteristic(f"characteristic function has {len(values)} values for {cell.m} facets")
    if any(v == 0 or v >> rank for v in values):
        raise InvalidCharacteristic("characteristic values must be nonzero vectors of the given rank")
    return [s for s in cell.complex.top_simplices if gf2_rank([values[i] for i in s], rank) < len(s)]


def validate_characteristic(cell: SimpleCellInput, values: Sequence[int], rank: Optional[int] = None) -> bool:
    """Values at the facets through every vertex of P must span Z_2^n."""
    rank = cell.n if rank is None else rank
    defects = characteristic_defects(cell, values, rank)
    if defects:
        raise RankDeficient(f"values at {defects[0]} do not span Z_2^{rank}", witness=list(defects[0]))
    return True


class XorBasis:
    """Reduced basis of a subgroup of Z_2^r; canonical coset representatives clear the pivots."""

    def __init__(self, vectors: Sequence[int]):
        rows: Dict[int, int] = {}
        for v in vectors:
            for pivot, row in rows.items():
                if v >> pivot & 1:
                    v ^= row
            if not v:
                continue
            pivot = v.bit_length() - 1
            for other, row in list(rows.items()):
                if row >> pivot & 1:
                    rows[other] = row ^ v
            rows[pivot] = v
        self.rows = rows

    @property
    def dim(self) -> int:
        return len(self.rows)

    def canonical(self, g: int) -> int:
        for pivot, row in self.rows.items():
            if g >> pivot & 1:
                g ^= row
        return g

    def representatives(self, rank: int) -> List[int]:
        free = [i for i in range(rank) if i not in self.rows]
        return [sum(1 << free[j] for j in range(len(free)) if k >> j & 1) for k in range(1 << len(free))]


@dataclass
class QuotientComplex:
    cell: SimpleCellInput
    rank: int
    assignment: Tuple[int, ...]
    faces: List[Simplex]
    bases: Dict[Simplex, XorBasis]
    cells: Dict[Simplex, List[int]]

    @property
    def n(self) -> int:
        return self.cell.n

    def canonical(self, face: Simplex, g: int) -> int:
        return self.bases[face].canonical(g)

    def cell_count(self) -> int:
        return sum(len(reps) for reps in self.cells.values())

    def f_vector(self) -> Tuple[int, ...]:
        """Cells by dimension; a face with k vertices of K has dimension n - k."""
        counts = [0] * (self.n + 1)
        for face, reps in self.cells.items():
            counts[self.n - len(face)] += len(reps)
        return tuple(counts)

    def euler(self) -> int:
        return sum((-1) ** d * c for d, c in enumerate(self.f_vector()))

    @cached_property
    def cell_index(self) -> Dict[Tuple[Simplex, int], int]:
        index = {}
        for face in self.faces:
            for g in self.cells[face]:
                index[(face, g)] = len(index)
        return index


def build_quotient(cell: SimpleCellInput, assignment: Sequence[int], rank: int) -> QuotientComplex:
    """Face-coset cells of (P x Z_2^rank) / ~ where facet i is glued by assignment[i]."""
    if len(assignment) != cell.m:
        raise InvalidCharacteristic(f"assignment has {len(assignment)} values for {cell.m} facets")
    if rank == cell.n and characteristic_defects(cell, assignment, rank):
        raise InvalidCharacteristic("assignment fails the characteristic condition")
    faces: List[Simplex] = [()] + cell.complex.faces()
    bases: Dict[Simplex, XorBasis] = {}
    cells: Dict[Simplex, List[int]] = {}
    for face in faces:
        basis = XorBasis([assignment[i] for i in face])
        if basis.dim < len(face):
            raise InvalidCharacteristic(f"generators over the face {face} are dependent", witness=list(face))
        bases[face] = basis
        cells[face] = basis.representatives(rank)
    quotient = QuotientComplex(
        cell=cell, rank=rank, assignment=tuple(assignment), faces=faces, bases=bases, cells=cells,
    )
    logger.info(f"quotient of rank {rank}: {quotient.cell_count()} cells, f-vector {quotient.f_vector()}")
    return quotient


def real_moment_angle(cell: SimpleCellInput) -> QuotientComplex:
    return build_quotient(cell, [1 << i for i in range(cell.m)], cell.m)


def small_cover(cell: SimpleCellInput, values: Sequence[int]) -> QuotientComplex:
    return build_quotient(cell, values, cell.n)


class LocalReport(NamedTuple):
    expected: int
    violations: List[Tuple[Simplex, int, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def euler_and_local_check(q: QuotientComplex) -> Tuple[int, LocalReport]:
    """Euler characteristic and the count of top cells around every vertex cell."""
    expected = 1 << q.n
    violations = []
    for vertex in q.cell.complex.top_simplices:
        around: Dict[int, int] = {}
        for g in q.cells[()]:
            rep = q.canonical(vertex, g)
            around[rep] = around.get(rep, 0) + 1
        for rep in q.cells[vertex]:
            if around.get(rep, 0) != expected:
                violations.append((vertex, rep, around.get(rep, 0)))
    if violations:
        logger.warning(f"local check: {len(violations)} vertex cells with the wrong number of top cells")
    return q.euler(), LocalReport(expected=expected, violations=violations)


# === Subdivision du quotient ===

class QuotientSubdivision(NamedTuple):
    complex: AbstractComplex
    parity_orientation: Optional[Tuple[int, ...]]


def _flags(z: AbstractComplex) -> List[Tuple[Tuple[Simplex, ...], Tuple[int, ...]]]:
    """Full flags sigma_1 < ... < sigma_n of K with the order in which vertices were added."""
    flags = []
    for simplex in z.top_simplices:
        for order in itertools.permutations(simplex):
            flags.append((tuple(tuple(sorted(order[:k])) for k in range(1, len(order) + 1)), order))
    return flags


def quotient_subdivision(q: QuotientComplex) -> QuotientSubdivision:
    """Barycentric subdivision of the quotient; vertices are its cells.

    The parity orientation of the top simplex (flag, g) is (-1)^|g| times the
    orientation the flag inherits from K, when K is oriented.
    """
    index = q.cell_index
    oriented = q.cell.pm is not None and q.cell.pm.orientation is not None
    tops, signs = [], []
    flags = _flags(q.cell.complex)
    for g in q.cells[()]:
        for flag, order in flags:
            ids = [index[((), g)]] + [index[(face, q.canonical(face, g))] for face in flag]
            tops.append(tuple(sorted(ids)))
            if oriented:
                k_sign = q.cell.pm.sign(q.cell.complex.index[flag[-1]]) * permutation_sign(order)
                signs.append((-1) ** popcount(g) * k_sign * permutation_sign(ids))
    complex_ = AbstractComplex.from_simplices(tops, vertex_count=len(index))
    if oriented:
        by_top = dict(zip(tops, signs))
        orientation = tuple(by_top[t] for t in complex_.top_simplices)
    else:
        orientation = None
    return QuotientSubdivision(complex=complex_, parity_orientation=orientation)


class QuotientSummary(NamedTuple):
    cells: int
    f_vector: Tuple[int, ...]
    euler: int
    local_ok: bool
    pseudo_manifold: bool
    orientable: Optional[bool]
    parity_orientation_ok: Optional[bool]

    def as_dict(self) -> Dict[str, object]:
        return self._asdict() | {"f_vector": list(self.f_vector)}


def summarize_quotient(q: QuotientComplex) -> QuotientSummary:
    chi, local = euler_and_local_check(q)
    sub = quotient_subdivision(q)
    report = pseudo_manifold_report(sub.complex)
    parity_ok = None
    if sub.parity_orientation is not None and report.is_pseudo_manifold:
        parity_ok = not pseudo_manifold_report(sub.complex, orientation=sub.parity_orientation).conflicts
    return QuotientSummary(
        cells=q.cell_count(),
        f_vector=q.f_vector(),
        euler=chi,
        local_ok=local.ok,
        pseudo_manifold=report.is_pseudo_manifold and report.strongly_connected,
        orientable=report.orientable,
        parity_orientation_ok=parity_ok,
    )


# === Domination induite ===

class DominationResult(NamedTuple):
    images: Tuple[int, ...]
    map_degree: int
    degree: int
    expected: Optional[int]
    m1: int
    m2: int

    @property
    def matches_expected(self) -> bool:
        return self.degree == self.expected


def induced_domination(
    phi: SimplicialMap,
    z1: OrientedPseudoManifold,
    z2: OrientedPseudoManifold,
) -> DominationResult:
    """Cell map R_{P1} -> R_{P2}, [p, g] -> [phi(p), mu(g)] with mu(a_i) = b_phi(i).

    Top cell g of R_P carries the sign (-1)^|g| relative to the orientation of P
    induced by K; the degree is the signed fiber count over each target top cell.
    """
    degree_phi = map_degree(phi, z1, z2)
    if degree_phi == 0:
        raise ZeroDegreeInput("simplicial map has degree 0")
    m1, m2 = z1.complex.vertex_count, z2.complex.vertex_count

    g = np.arange(1 << m1, dtype=np.int64)
    images = np.zeros_like(g)
    parity = np.zeros_like(g)
    for i, target in enumerate(phi.vertex_map):
        bit = (g >> i) & 1
        images ^= bit << target
        parity ^= bit
    for j in range(m2):
        parity ^= (images >> j) & 1

    size = 1 << m2
    fibers = np.bincount(images[parity == 0], minlength=size) - np.bincount(images[parity == 1], minlength=size)
    fibers = fibers * degree_phi
    values = sorted({int(v) for v in fibers})
    if len(values) != 1:
        raise InconsistentDegree("signed fiber count depends on the target cell", witness=values)
    degree = values[0]
    expected = (1 << (m1 - m2)) * degree_phi if m1 >= m2 else None
    logger.info(f"induced domination: deg phi = {degree_phi}, total degree {degree}")
    return DominationResult(
        images=tuple(int(h) for h in images), map_degree=degree_phi, degree=degree, expected=expected, m1=m1, m2=m2,
    )


# === Prédicats du théorème ===

class FlagSquareResult(NamedTuple):
    is_flag: bool
    has_empty_square: bool
    missing_faces: List[Tuple[int, ...]]
    empty_squares: List[Tuple[int, ...]]


def flag_square_predicates(complex_: AbstractComplex) -> FlagSquareResult:
    graph = complex_.graph()
    missing = []
    for clique in nx.enumerate_all_cliques(graph):
        if len(clique) >= 3 and not complex_.is_simplex(clique):
            clique = tuple(sorted(clique))
            # seulement les non-faces minimales
            if all(complex_.is_simplex(sub) for sub in itertools.combinations(clique, len(clique) - 1)):
                missing.append(clique)
    squares = sorted(
        tuple(cycle)
        for cycle in (_canonical_cycle(c) for c in nx.chordless_cycles(graph, length_bound=4))
        if len(cycle) == 4
    )
    return FlagSquareResult(
        is_flag=not missing,
        has_empty_square=bool(squares),
        missing_faces=sorted(missing),
        empty_squares=squares,
    )


def _canonical_cycle(cycle: Sequence[int]) -> Tuple[int, ...]:
    k = cycle.index(min(cycle))
    rotated = list(cycle[k:]) + list(cycle[:k])
    if len(rotated) > 2 and rotated[-1] < rotated[1]:
        rotated = [rotated[0]] + rotated[:0:-1]
    return tuple(rotated)


def facet_coloring_search(complex_: AbstractComplex, n: int) -> Optional[List[int]]:
    """Regular coloring of the facets of P (vertices of K) in colors 1..n, or None."""
    neighbours = [sorted(complex_.graph().neighbors(v)) for v in range(complex_.vertex_count)]
    colors = [0] * complex_.vertex_count

    def extend(v: int) -> bool:
        if v == len(colors):
            return True
        used = {colors[u] for u in neighbours[v] if u < v}
        for c in range(1, n + 1):
            if c not in used:
                colors[v] = c
                if extend(v + 1):
                    return True
        colors[v] = 0
        return False

    return colors if extend(0) else None
