"""The permutahedron: facets indexed by nonempty proper subsets of colors.

Subsets are bitmasks (bit c-1 for color c). Region/facet indices follow
`omega_list(n)`: by size, then by sorted member colors.
"""
import itertools
import logging
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, NamedTuple, Sequence, Tuple

import mpmath
import numpy as np
from scipy.linalg import helmert
from sympy import Matrix, Rational

from coxeter import Poset
from errors import PreconditionFailed, ZeroDirection
from schemas import SparseReport
from simplicial import (
    AbstractComplex,
    OrientedPseudoManifold,
    SimplicialMap,
    Subdivision,
    barycentric_subdivide,
    boundary_of_simplex,
    map_degree,
    simplex_complex,
    validate_pseudo_manifold,
)

logger = logging.getLogger(__name__)

OmegaSet = int
Chain = Tuple[OmegaSet, ...]


# === Sous-ensembles de couleurs ===

def members(omega: OmegaSet) -> Tuple[int, ...]:
    return tuple(c + 1 for c in range(omega.bit_length()) if omega >> c & 1)


def mask_of(colors: Sequence[int]) -> OmegaSet:
    mask = 0
    for c in colors:
        mask |= 1 << (c - 1)
    return mask


def size(omega: OmegaSet) -> int:
    return bin(omega).count("1")


def omega_list(n: int) -> List[OmegaSet]:
    if n < 1:
        raise PreconditionFailed(f"n must be at least 1, got {n}")
    full = (1 << (n + 1)) - 1
    return sorted(range(1, full), key=lambda w: (size(w), members(w)))


def is_subset(a: OmegaSet, b: OmegaSet) -> bool:
    return a & b == a


def omega_poset(n: int) -> Poset:
    omegas = omega_list(n)
    less = frozenset((a, b) for a in omegas for b in omegas if a != b and is_subset(a, b))
    return Poset(elements=tuple(omegas), strict_less=less)


def maximal_chains(n: int) -> List[Chain]:
    """One maximal chain per ordering of the colors."""
    chains = []
    for order in itertools.permutations(range(1, n + 2)):
        chains.append(tuple(mask_of(order[:k]) for k in range(1, n + 1)))
    return chains


# === Géométrie exacte ===

class PermGeometry:
    """Exact coordinates of the permutahedron with vertices the permutations of (1, ..., n+1)."""

    def __init__(self, n: int):
        if n < 1:
            raise PreconditionFailed(f"n must be at least 1, got {n}")
        self.n = n
        self.total = Rational((n + 1) * (n + 2), 2)
        self.center = tuple(Rational(n + 2, 2) for _ in range(n + 1))
        self.R_sq = Rational(n * (n + 1) * (n + 2), 12)
        self.r_sq = Rational(n * (n + 1), 4)

    @cached_property
    def vertices(self) -> List[Tuple[int, ...]]:
        return list(itertools.permutations(range(1, self.n + 2)))

    @cached_property
    def doubled_vertices(self) -> np.ndarray:
        """2 * (vertex - o): integer coordinates."""
        return np.array([[2 * t - (self.n + 2) for t in v] for v in self.vertices], dtype=np.int64)

    def bound(self, omega: OmegaSet) -> int:
        """Right-hand side of the facet equation: the sum of the |omega| largest values."""
        k = size(omega)
        return k * (2 * self.n + 3 - k) // 2

    def gap(self, omega: OmegaSet) -> Rational:
        k = size(omega)
        return Rational(k * (self.n + 1 - k), 2)

    def on_facet(self, vertex: Sequence[int], omega: OmegaSet) -> bool:
        return sum(vertex[c - 1] for c in members(omega)) == self.bound(omega)

    def facet_vertices(self, omega: OmegaSet) -> List[int]:
        return [i for i, v in enumerate(self.vertices) if self.on_facet(v, omega)]

    def face_chain(self, vertex: Sequence[int]) -> Chain:
        """Facets through a vertex: the positions of its k largest values, k = 1..n."""
        order = sorted(range(self.n + 1), key=lambda i: -vertex[i])
        return tuple(mask_of([i + 1 for i in order[:k]]) for k in range(1, self.n + 1))

    def facet_distance_sq(self, omega: OmegaSet) -> Rational:
        k = size(omega)
        return Rational(k * (self.n + 1 - k) * (self.n + 1), 4)

    def chain_barycenter(self, chain: Chain) -> Tuple[Rational, ...]:
        """Barycenter of the face cut out by a chain (the body for the empty chain)."""
        point = [None] * (self.n + 1)
        values = list(range(self.n + 1, 0, -1))
        done = 0
        previous = 0
        for omega in tuple(chain) + ((1 << (self.n + 1)) - 1,):
            block = members(omega & ~previous)
            top = values[done:done + len(block)]
            for c in block:
                point[c - 1] = Rational(sum(top), len(top))
            done += len(block)
            previous = omega
        return tuple(point)

    def facets_intersect(self, a: OmegaSet, b: OmegaSet) -> bool:
        return bool(set(self.facet_vertices(a)) & set(self.facet_vertices(b)))


def facet_adjacency_matches_poset(n: int) -> bool:
    geometry = PermGeometry(n)
    poset = omega_poset(n)
    omegas = omega_list(n)
    return all(
        geometry.facets_intersect(a, b) == poset.comparable(a, b)
        for a, b in itertools.combinations(omegas, 2)
    )


# === Dualité avec la subdivision du bord du simplexe ===

class DualComplex(NamedTuple):
    complex: AbstractComplex
    omegas: List[OmegaSet]
    iso: SimplicialMap
    target: Subdivision


def dual_complex(n: int) -> DualComplex:
    omegas = omega_list(n)
    index = {omega: i for i, omega in enumerate(omegas)}
    tops = [tuple(sorted(index[w] for w in chain)) for chain in maximal_chains(n)]
    k_perm = AbstractComplex.from_simplices(tops, vertex_count=len(omegas))

    target = barycentric_subdivide(boundary_of_simplex(n))
    face_id = {face: i for i, face in enumerate(target.faces)}
    vertex_map = tuple(face_id[tuple(c - 1 for c in members(w))] for w in omegas)
    iso = SimplicialMap(source=k_perm, target=target.complex, vertex_map=vertex_map)
    if not iso.is_isomorphism():
        raise PreconditionFailed(f"chain complex of the n={n} poset is not isomorphic to the subdivided sphere")
    logger.debug(f"dual complex n={n}: f-vector {k_perm.f_vector()}")
    return DualComplex(complex=k_perm, omegas=omegas, iso=iso, target=target)


# === Projection sur le simplexe ===

def _geometric_sign(points: Sequence[Sequence[Rational]]) -> int:
    """Orientation of an n-simplex in a hyperplane of R^{n+1} with normal (1, ..., 1)."""
    base = points[0]
    rows = [[p[i] - base[i] for i in range(len(base))] for p in points[1:]]
    rows.append([1] * len(base))
    det = Matrix(rows).det()
    if det == 0:
        raise PreconditionFailed("degenerate simplex while anchoring an orientation")
    return 1 if det > 0 else -1


def _anchor(z: OrientedPseudoManifold, positions: Sequence[Sequence[Rational]]) -> OrientedPseudoManifold:
    first = z.complex.top_simplices[0]
    if _geometric_sign([positions[v] for v in first]) != z.sign(0):
        return z.flipped()
    return z


class Projection(NamedTuple):
    map: SimplicialMap
    source: OrientedPseudoManifold
    target: OrientedPseudoManifold
    chains: List[Chain]
    degree: int
    containment_ok: bool


def pi_vertex(chain: Chain, n: int) -> OmegaSet:
    """Face F_{w1} n ... n F_{wk} goes to the barycenter of Delta_{w1}; the body to the body."""
    return chain[0] if chain else (1 << (n + 1)) - 1


def pi_projection(n: int) -> Projection:
    geometry = PermGeometry(n)
    chains = sorted(
        {tuple(chain[j] for j in keep) for chain in maximal_chains(n) for r in range(n + 1)
         for keep in itertools.combinations(range(n), r)},
        key=lambda c: (len(c), c),
    )
    chain_id = {c: i for i, c in enumerate(chains)}

    tops = []
    for chain in maximal_chains(n):
        for order in itertools.permutations(range(n)):
            flag, current = [], list(chain)
            flag.append(chain_id[tuple(current)])
            for j in order:
                current.remove(chain[j])
                flag.append(chain_id[tuple(current)])
            tops.append(tuple(sorted(flag)))
    source_complex = AbstractComplex.from_simplices(tops, vertex_count=len(chains))
    source = validate_pseudo_manifold(source_complex, allow_boundary=True)
    source = _anchor(source, [geometry.chain_barycenter(c) for c in chains])

    target_sub = barycentric_subdivide(simplex_complex(n))
    target = validate_pseudo_manifold(target_sub.complex, allow_boundary=True)
    target_positions = [
        tuple(Rational(1, len(face)) if i in face else Rational(0) for i in range(n + 1))
        for face in target_sub.faces
    ]
    target = _anchor(target, target_positions)

    face_id = {face: i for i, face in enumerate(target_sub.faces)}
    vertex_map = tuple(face_id[tuple(c - 1 for c in members(pi_vertex(c, n)))] for c in chains)
    projection = SimplicialMap(source=source_complex, target=target_sub.complex, vertex_map=vertex_map)
    degree = map_degree(projection, source, target)

    containment_ok = all(
        is_subset(pi_vertex(chain, n), omega)
        for chain in chains
        for omega in chain
    )
    logger.info(f"projection n={n}: {len(tops)} -> {len(target_sub.complex.top_simplices)} simplices, degree {degree}")
    return Projection(
        map=projection,
        source=source,
        target=target,
        chains=chains,
        degree=degree,
        containment_ok=containment_ok,
    )


# === Constantes ===

@dataclass(frozen=True)
class ConstantsTable:
    n: int
    eps: mpmath.mpf
    rho: mpmath.mpf
    R: mpmath.mpf
    r: mpmath.mpf
    residual: mpmath.mpf
    cos_eps: Rational
    cosh_rho_sq: Rational
    R_sq: Rational
    r_sq: Rational

    def as_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "eps": float(self.eps),
            "rho": float(self.rho),
            "R": float(self.R),
            "r": float(self.r),
            "residual": float(self.residual),
            "exact": {
                "cos_eps": str(self.cos_eps),
                "cosh_rho_sq": str(self.cosh_rho_sq),
                "R_sq": str(self.R_sq),
                "r_sq": str(self.r_sq),
            },
        }


def constants(n: int) -> ConstantsTable:
    if n < 1:
        raise PreconditionFailed(f"n must be at least 1, got {n}")
    q = Rational(n * (n + 1) * (n + 2), 6)
    R_sq = q / 2
    r_sq = Rational(n * (n + 1), 4)
    cos_eps = 1 - 1 / R_sq
    with mpmath.workprec(128):
        eps = mpmath.acos(mpmath.mpf(cos_eps.p) / cos_eps.q)
        rho = mpmath.acosh(mpmath.sqrt(mpmath.mpf(q.p) / q.q))
        residual = abs(rho - mpmath.asinh(mpmath.cot(eps / 2)))
        table = ConstantsTable(
            n=n,
            eps=eps,
            rho=rho,
            R=mpmath.sqrt(mpmath.mpf(R_sq.p) / R_sq.q),
            r=mpmath.sqrt(mpmath.mpf(r_sq.p) / r_sq.q),
            residual=residual,
            cos_eps=cos_eps,
            cosh_rho_sq=q,
            R_sq=R_sq,
            r_sq=r_sq,
        )
    return table


# === Certificat de dispersion ===

def cos_at_most(dot: int, norm_sq_x: int, norm_sq_y: int, c: Rational) -> bool:
    """Exact test of dot / (|x| |y|) <= c without square roots."""
    if c >= 0:
        return bool(dot <= 0 or dot * dot <= c * c * norm_sq_x * norm_sq_y)
    return bool(dot < 0 and dot * dot >= c * c * norm_sq_x * norm_sq_y)


def diameter_check(n: int) -> Tuple[bool, bool]:
    """(2 arccos(r/R) <= pi - eps, equality) decided in rationals."""
    table = constants(n)
    lhs = 2 * table.r_sq / table.R_sq - 1   # cos(2 arccos(r/R))
    rhs = -table.cos_eps                    # cos(pi - eps)
    return bool(lhs >= rhs), bool(lhs == rhs)


def sparse_certificate(n: int, samples: int = 0, seed: int = 0) -> SparseReport:
    geometry = PermGeometry(n)
    table = constants(n)
    omegas = omega_list(n)
    poset = omega_poset(n)
    u = geometry.doubled_vertices
    norm_sq = int(4 * table.R_sq)
    # |u|^2 = 4 R^2 pour tous les sommets : cos <= c  <=>  u.v <= c |u|^2
    dot_bound = table.cos_eps * norm_sq

    facet_vertices = {w: geometry.facet_vertices(w) for w in omegas}
    pairs = set()
    for a, b in poset.incomparable_pairs:
        for i in facet_vertices[a]:
            for j in facet_vertices[b]:
                pairs.add((min(i, j), max(i, j)))

    violations = []
    for i, j in sorted(pairs):
        dot = int(u[i] @ u[j])
        if dot > dot_bound:
            violations.append({"x": list(geometry.vertices[i]), "y": list(geometry.vertices[j]), "dot": dot})

    rng = random.Random(seed)
    incomparable = poset.incomparable_pairs
    for _ in range(samples if incomparable else 0):
        a, b = rng.choice(incomparable)
        x = _random_facet_direction(u, facet_vertices[a], rng)
        y = _random_facet_direction(u, facet_vertices[b], rng)
        dot = int(x @ y)
        if not cos_at_most(dot, int(x @ x), int(y @ y), table.cos_eps):
            violations.append({"x_dir": x.tolist(), "y_dir": y.tolist(), "facets": [list(members(a)), list(members(b))]})

    diameter_ok, equality = diameter_check(n)
    if violations:
        logger.warning(f"sparseness n={n}: {len(violations)} violations")
    logger.info(f"sparseness n={n}: {len(pairs)} vertex pairs, {samples} samples, diameter equality={equality}")
    return SparseReport(
        n=n,
        pairs_checked=len(pairs),
        samples_checked=samples if incomparable else 0,
        cos_bound=str(table.cos_eps),
        diameter_ok=diameter_ok,
        violations=violations,
    )


def _random_facet_direction(u: np.ndarray, vertex_ids: List[int], rng: random.Random) -> np.ndarray:
    """Integer direction from o to a random rational convex combination of facet vertices."""
    weights = np.array([rng.randint(0, 9) for _ in vertex_ids], dtype=np.int64)
    if not weights.any():
        weights[rng.randrange(len(weights))] = 1
    return weights @ u[vertex_ids]


# === Carte radiale ===

class RayHit(NamedTuple):
    point: Tuple
    members: List[int]


class RadialChart:
    """Radial projection h of the permutahedron boundary onto the unit sphere around o.

    Directions are either sum-zero vectors of length n+1 (exact when given as
    integers or Rationals) or vectors of R^n, embedded through the Helmert basis.
    """

    def __init__(self, n: int, tolerance: float = 1e-9):
        self.n = n
        self.geometry = PermGeometry(n)
        self.omegas = omega_list(n)
        self.poset = omega_poset(n)
        self.tolerance = tolerance
        self.table = constants(n)
        self.eps = float(self.table.eps)
        self.basis = helmert(n + 1)  # lignes orthonormées, orthogonales à (1, ..., 1)
        self.masks = np.array([[c in members(w) for c in range(1, n + 2)] for w in self.omegas], dtype=float)
        self.gaps = np.array([float(self.geometry.gap(w)) for w in self.omegas])

    def lift(self, direction: Sequence) -> np.ndarray:
        direction = np.asarray(direction, dtype=float)
        if direction.shape == (self.n,):
            return direction @ self.basis
        return direction - direction.mean()

    def to_sphere(self, point: Sequence) -> np.ndarray:
        """Coordinates in R^n of h(point), point given in R^{n+1}."""
        v = self.basis @ (np.asarray(point, dtype=float) - float(self.geometry.center[0]))
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ZeroDirection("the center has no radial image")
        return v / norm

    def hit(self, direction: Sequence) -> RayHit:
        if len(direction) == self.n + 1 and all(isinstance(x, (int, Rational)) for x in direction):
            return self._hit_exact(direction)
        return self._hit_float(direction)

    def _hit_exact(self, direction: Sequence) -> RayHit:
        mean = Rational(sum(direction), self.n + 1)
        d = [Rational(x) - mean for x in direction]
        if not any(d):
            raise ZeroDirection("zero direction", witness=[str(x) for x in direction])
        best, hits = None, []
        for i, omega in enumerate(self.omegas):
            rate = sum(d[c - 1] for c in members(omega))
            if rate <= 0:
                continue
            t = self.geometry.gap(omega) / rate
            if best is None or t < best:
                best, hits = t, [i]
            elif t == best:
                hits.append(i)
        point = tuple(o + best * x for o, x in zip(self.geometry.center, d))
        return RayHit(point=point, members=hits)

    def _hit_float(self, direction: Sequence) -> RayHit:
        d = self.lift(direction)
        scale = np.linalg.norm(d)
        if scale == 0:
            raise ZeroDirection("zero direction", witness=list(map(float, direction)))
        d = d / scale
        rates = self.masks @ d
        with np.errstate(divide="ignore"):
            times = np.where(rates > self.tolerance, self.gaps / np.where(rates > 0, rates, 1), np.inf)
        best = times.min()
        hits = [int(i) for i in np.flatnonzero(times <= best * (1 + self.tolerance) + self.tolerance)]
        point = tuple(float(self.geometry.center[0]) + best * d)
        return RayHit(point=point, members=hits)

    def inverse(self, direction: Sequence) -> Tuple:
        return self.hit(direction).point

    def regions(self, direction: Sequence) -> List[int]:
        return self.hit(direction).members

    def is_member(self, direction: Sequence, omega: OmegaSet) -> bool:
        return self.omegas.index(omega) in self.regions(direction)

    def region_distance_bound(self, i: int, j: int) -> float:
        """Lower bound on the distance between two regions: eps for disjoint facets."""
        a, b = self.omegas[i], self.omegas[j]
        return 0.0 if self.poset.comparable(a, b) else self.eps

    @cached_property
    def diameter_bound(self) -> float:
        R, r = self.table.R, self.table.r
        return float(2 * mpmath.acos(r / R))

    def regions_intersect(self, i: int, j: int) -> bool:
        return self.poset.comparable(self.omegas[i], self.omegas[j])


def radial_chart(n: int, tolerance: float = 1e-9) -> RadialChart:
    return RadialChart(n, tolerance=tolerance)
