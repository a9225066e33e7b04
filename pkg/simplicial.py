"""Abstract simplicial complexes, pseudo-manifolds, subdivision and degrees.

Complexes are stored as sorted lists of top simplices; lower faces are derived
on demand. A top simplex listed with sorted vertex ids has sign +1 under the
identity ordering, odd reorderings flip the sign.
"""
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from errors import (
    DegenerateBase,
    InconsistentDegree,
    InvalidComplex,
    IrregularColoring,
    NonOrientable,
    NonPseudoManifold,
    NotSimplicial,
    NotStronglyConnected,
    PreconditionFailed,
)

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]


def permutation_sign(seq: Sequence[int]) -> int:
    """Signe de la permutation qui trie `seq` (éléments distincts)."""
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class AbstractComplex:
    vertex_count: int
    top_simplices: Tuple[Simplex, ...]
    dim: int

    def __post_init__(self):
        if not self.top_simplices:
            raise InvalidComplex("complex without top simplices")
        seen = set()
        for simplex in self.top_simplices:
            if len(simplex) != self.dim + 1:
                raise InvalidComplex(f"simplex {simplex} is not of dimension {self.dim}", witness=list(simplex))
            if list(simplex) != sorted(set(simplex)):
                raise InvalidComplex(f"simplex {simplex} is not sorted or repeats a vertex", witness=list(simplex))
            if simplex[0] < 0 or simplex[-1] >= self.vertex_count:
                raise InvalidComplex(f"simplex {simplex} uses a vertex outside [0, {self.vertex_count})", witness=list(simplex))
            if simplex in seen:
                raise InvalidComplex(f"duplicate top simplex {simplex}", witness=list(simplex))
            seen.add(simplex)

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable[int]], vertex_count: Optional[int] = None) -> "AbstractComplex":
        tops = [tuple(sorted(s)) for s in simplices]
        if not tops:
            raise InvalidComplex("complex without top simplices")
        if len(set(tops)) != len(tops):
            raise InvalidComplex("duplicate top simplex in input")
        if vertex_count is None:
            vertex_count = max(max(s) for s in tops) + 1
        return cls(vertex_count=vertex_count, top_simplices=tuple(sorted(tops)), dim=len(tops[0]) - 1)

    @cached_property
    def index(self) -> Dict[Simplex, int]:
        return {s: i for i, s in enumerate(self.top_simplices)}

    @cached_property
    def face_set(self) -> frozenset:
        faces = set()
        for simplex in self.top_simplices:
            for k in range(1, len(simplex) + 1):
                faces.update(itertools.combinations(simplex, k))
        return frozenset(faces)

    def faces(self, size: Optional[int] = None) -> List[Simplex]:
        """Faces non vides triées par (taille, ordre lexicographique)."""
        faces = self.face_set if size is None else (f for f in self.face_set if len(f) == size)
        return sorted(faces, key=lambda f: (len(f), f))

    def is_simplex(self, vertices: Iterable[int]) -> bool:
        key = tuple(sorted(set(vertices)))
        return not key or key in self.face_set

    @cached_property
    def ridges(self) -> Dict[Simplex, List[Tuple[int, int]]]:
        """Codimension-one faces mapped to (top simplex index, dropped position)."""
        ridges: Dict[Simplex, List[Tuple[int, int]]] = defaultdict(list)
        for i, simplex in enumerate(self.top_simplices):
            for pos in range(len(simplex)):
                ridges[simplex[:pos] + simplex[pos + 1:]].append((i, pos))
        return dict(ridges)

    @cached_property
    def stars(self) -> Dict[Simplex, List[int]]:
        stars: Dict[Simplex, List[int]] = defaultdict(list)
        for i, simplex in enumerate(self.top_simplices):
            for k in range(1, len(simplex) + 1):
                for face in itertools.combinations(simplex, k):
                    stars[face].append(i)
        return dict(stars)

    def edges(self) -> List[Tuple[int, int]]:
        return self.faces(2)

    def f_vector(self) -> Tuple[int, ...]:
        counts = [0] * (self.dim + 1)
        for face in self.face_set:
            counts[len(face) - 1] += 1
        return tuple(counts)

    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        graph.add_edges_from(self.edges())
        return graph


@dataclass(frozen=True)
class VertexColoring:
    colors: Tuple[int, ...]
    regular: bool

    @classmethod
    def check(cls, complex_: AbstractComplex, colors: Sequence[int]) -> "VertexColoring":
        if len(colors) != complex_.vertex_count:
            raise IrregularColoring(f"coloring has {len(colors)} entries for {complex_.vertex_count} vertices")
        regular = all(colors[u] != colors[v] for u, v in complex_.edges())
        return cls(colors=tuple(colors), regular=regular)

    def color(self, vertex: int) -> int:
        return self.colors[vertex]


@dataclass(frozen=True)
class OrientedPseudoManifold:
    complex: AbstractComplex
    orientation: Optional[Tuple[int, ...]]
    strongly_connected: bool
    boundary: Tuple[Simplex, ...] = ()

    @property
    def dim(self) -> int:
        return self.complex.dim

    def sign(self, i: int) -> int:
        if self.orientation is None:
            raise NonOrientable("pseudo-manifold carries no orientation")
        return self.orientation[i]

    def flipped(self) -> "OrientedPseudoManifold":
        if self.orientation is None:
            return self
        return OrientedPseudoManifold(
            complex=self.complex,
            orientation=tuple(-s for s in self.orientation),
            strongly_connected=self.strongly_connected,
            boundary=self.boundary,
        )


@dataclass
class PseudoManifoldReport:
    bad_ridges: List[Tuple[Simplex, int]]
    components: int
    boundary: List[Simplex]
    orientation: Optional[Tuple[int, ...]]
    conflicts: List[Simplex]

    @property
    def is_pseudo_manifold(self) -> bool:
        return not self.bad_ridges

    @property
    def strongly_connected(self) -> bool:
        return self.components == 1

    @property
    def orientable(self) -> Optional[bool]:
        if self.bad_ridges:
            return None
        return not self.conflicts


def _adjacency(complex_: AbstractComplex) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(complex_.top_simplices)))
    for ridge, incident in complex_.ridges.items():
        if len(incident) == 2:
            (u, pu), (v, pv) = incident
            graph.add_edge(u, v, drops={u: pu, v: pv}, ridge=ridge)
    return graph


def _inconsistent_ridges(complex_: AbstractComplex, signs: Sequence[int]) -> List[Simplex]:
    conflicts = []
    for ridge, incident in complex_.ridges.items():
        if len(incident) != 2:
            continue
        (u, pu), (v, pv) = incident
        # les signes induits sur la face commune doivent s'annuler
        if signs[u] * (-1) ** pu + signs[v] * (-1) ** pv != 0:
            conflicts.append(ridge)
    return sorted(conflicts)


def pseudo_manifold_report(
    complex_: AbstractComplex,
    orient: bool = True,
    allow_boundary: bool = False,
    orientation: Optional[Sequence[int]] = None,
) -> PseudoManifoldReport:
    """Liste toutes les faces fautives au lieu de lever une exception."""
    bad, boundary = [], []
    for ridge, incident in sorted(complex_.ridges.items()):
        if len(incident) == 2:
            continue
        if len(incident) == 1 and allow_boundary:
            boundary.append(ridge)
        else:
            bad.append((ridge, len(incident)))

    graph = _adjacency(complex_)
    components = nx.number_connected_components(graph)

    signs: Optional[Tuple[int, ...]] = None
    conflicts: List[Simplex] = []
    if not bad and orientation is not None:
        signs = tuple(int(s) for s in orientation)
        conflicts = _inconsistent_ridges(complex_, signs)
    elif not bad and orient:
        propagated = [0] * len(complex_.top_simplices)
        for component in sorted(nx.connected_components(graph), key=min):
            root = min(component)
            propagated[root] = 1
            for u, v in nx.bfs_edges(graph, root):
                drops = graph.edges[u, v]["drops"]
                propagated[v] = -propagated[u] * (-1) ** (drops[u] + drops[v])
        signs = tuple(propagated)
        conflicts = _inconsistent_ridges(complex_, signs)

    return PseudoManifoldReport(
        bad_ridges=bad,
        components=components,
        boundary=boundary,
        orientation=signs if signs is not None and not conflicts else None,
        conflicts=conflicts,
    )


def validate_pseudo_manifold(
    complex_: AbstractComplex,
    orient: bool = True,
    require_connected: bool = True,
    allow_boundary: bool = False,
    orientation: Optional[Sequence[int]] = None,
) -> OrientedPseudoManifold:
    report = pseudo_manifold_report(complex_, orient=orient, allow_boundary=allow_boundary, orientation=orientation)
    if report.bad_ridges:
        raise NonPseudoManifold(
            f"{len(report.bad_ridges)} codimension-one faces are not in exactly two top simplices",
            witness=[[list(r), c] for r, c in report.bad_ridges],
        )
    if require_connected and not report.strongly_connected:
        raise NotStronglyConnected(f"facet-adjacency graph has {report.components} components", witness=report.components)
    if (orient or orientation is not None) and report.conflicts:
        raise NonOrientable("sign propagation is inconsistent", witness=[list(r) for r in report.conflicts])
    return OrientedPseudoManifold(
        complex=complex_,
        orientation=report.orientation,
        strongly_connected=report.strongly_connected,
        boundary=tuple(report.boundary),
    )


class Subdivision(NamedTuple):
    complex: AbstractComplex
    coloring: VertexColoring
    faces: List[Simplex]


def barycentric_subdivide(complex_: AbstractComplex) -> Subdivision:
    """Vertices are the faces of K (ordered by dimension), top simplices are full flags."""
    faces = complex_.faces()
    face_id = {face: i for i, face in enumerate(faces)}
    flags = []
    for simplex in complex_.top_simplices:
        for order in itertools.permutations(simplex):
            flags.append(tuple(face_id[tuple(sorted(order[:k + 1]))] for k in range(len(order))))
    sub = AbstractComplex.from_simplices(flags, vertex_count=len(faces))
    coloring = VertexColoring.check(sub, [len(face) for face in faces])
    logger.debug(f"subdivision: {len(complex_.top_simplices)} -> {len(flags)} top simplices")
    return Subdivision(complex=sub, coloring=coloring, faces=faces)


def subdivide_orientation(z: OrientedPseudoManifold, sub: Subdivision) -> OrientedPseudoManifold:
    """Orientation inherited by the subdivision: flag sign = parent sign times the sign of the vertex order."""
    face_id = {face: i for i, face in enumerate(sub.faces)}
    signs = [0] * len(sub.complex.top_simplices)
    for i, simplex in enumerate(z.complex.top_simplices):
        for order in itertools.permutations(simplex):
            flag = tuple(face_id[tuple(sorted(order[:k + 1]))] for k in range(len(order)))
            signs[sub.complex.index[flag]] = z.sign(i) * permutation_sign(order)
    return validate_pseudo_manifold(
        sub.complex,
        orientation=signs,
        require_connected=z.strongly_connected,
        allow_boundary=bool(z.boundary),
    )


class ChessColoring(NamedTuple):
    plus: Tuple[int, ...]
    minus: Tuple[int, ...]

    def is_white(self, i: int) -> bool:
        return i in self.white

    @property
    def white(self) -> frozenset:
        return frozenset(self.plus)


def _check_top_colors(z: OrientedPseudoManifold, col: VertexColoring) -> None:
    n = z.dim
    if not col.regular:
        raise IrregularColoring("coloring is not regular")
    for simplex in z.complex.top_simplices:
        colors = {col.color(v) for v in simplex}
        if len(colors) != n + 1 or not colors <= set(range(1, n + 2)):
            raise IrregularColoring(f"simplex {simplex} is not colored by 1..{n + 1}", witness=list(simplex))


def chess_coloring(z: OrientedPseudoManifold, col: VertexColoring) -> ChessColoring:
    """White iff the color-sorted vertex order is positively oriented."""
    _check_top_colors(z, col)
    plus, minus = [], []
    for i, simplex in enumerate(z.complex.top_simplices):
        by_color = sorted(simplex, key=col.color)
        if z.sign(i) * permutation_sign(by_color) == 1:
            plus.append(i)
        else:
            minus.append(i)
    return ChessColoring(plus=tuple(plus), minus=tuple(minus))


def star_balance_violations(z: OrientedPseudoManifold, chess: ChessColoring) -> List[Tuple[Simplex, int, int]]:
    """Faces of dimension < n whose star is not split evenly between white and black."""
    white = chess.white
    violations = []
    for face, star in sorted(z.complex.stars.items()):
        if len(face) == z.dim + 1:
            continue
        n_plus = sum(1 for i in star if i in white)
        n_minus = len(star) - n_plus
        if n_plus != n_minus:
            violations.append((face, n_plus, n_minus))
    return violations


def type_face(simplex: Sequence[int], omega: Iterable[int], col: VertexColoring) -> Simplex:
    """The unique face of `simplex` whose vertex colors are exactly omega."""
    wanted = set(omega)
    return tuple(sorted(v for v in simplex if col.color(v) in wanted))


@dataclass(frozen=True)
class SimplicialMap:
    source: AbstractComplex
    target: AbstractComplex
    vertex_map: Tuple[int, ...]

    def __post_init__(self):
        if len(self.vertex_map) != self.source.vertex_count:
            raise NotSimplicial(f"vertex map has {len(self.vertex_map)} entries for {self.source.vertex_count} vertices")
        if any(not 0 <= w < self.target.vertex_count for w in self.vertex_map):
            raise NotSimplicial("vertex map leaves the target vertex set")

    def image(self, simplex: Iterable[int]) -> Simplex:
        return tuple(sorted({self.vertex_map[v] for v in simplex}))

    def non_simplicial(self) -> List[Simplex]:
        return [s for s in self.source.top_simplices if not self.target.is_simplex(self.image(s))]

    def validate(self) -> "SimplicialMap":
        bad = self.non_simplicial()
        if bad:
            raise NotSimplicial(f"{len(bad)} simplices do not map onto simplices", witness=[list(s) for s in bad])
        return self

    def is_isomorphism(self) -> bool:
        if sorted(self.vertex_map) != list(range(self.target.vertex_count)):
            return False
        images = {self.image(s) for s in self.source.top_simplices}
        return images == set(self.target.top_simplices)

    def then(self, other: "SimplicialMap") -> "SimplicialMap":
        """Composite `other o self`."""
        return SimplicialMap(
            source=self.source,
            target=other.target,
            vertex_map=tuple(other.vertex_map[w] for w in self.vertex_map),
        )


def identity_map(complex_: AbstractComplex) -> SimplicialMap:
    return SimplicialMap(complex_, complex_, tuple(range(complex_.vertex_count)))


def preimage_counts(f: SimplicialMap, z1: OrientedPseudoManifold, z2: OrientedPseudoManifold) -> List[int]:
    """Signed count of nondegenerate preimages for every target top simplex."""
    counts = [0] * len(z2.complex.top_simplices)
    for i, simplex in enumerate(z1.complex.top_simplices):
        image = [f.vertex_map[v] for v in simplex]
        if len(set(image)) < len(image):
            continue
        j = z2.complex.index.get(tuple(sorted(image)))
        if j is None:
            continue
        counts[j] += z1.sign(i) * z2.sign(j) * permutation_sign(image)
    return counts


def map_degree(f: SimplicialMap, z1: OrientedPseudoManifold, z2: OrientedPseudoManifold) -> int:
    if z1.dim != z2.dim:
        raise PreconditionFailed(f"dimensions differ: {z1.dim} != {z2.dim}")
    if not z2.strongly_connected:
        raise NotStronglyConnected("target is not strongly connected")
    f.validate()
    counts = preimage_counts(f, z1, z2)
    if len(set(counts)) != 1:
        raise InconsistentDegree(
            "signed preimage count depends on the target simplex",
            witness=sorted(set(counts)),
        )
    return counts[0]


def collapse_to_boundary_simplex(l: OrientedPseudoManifold) -> SimplicialMap:
    """Degree +-1 map L -> boundary of the n-simplex.

    The base facet gets the labels 0..n-1, every other vertex the label n; only
    the base facet then covers the face [0..n-1].
    """
    n = l.dim + 1
    base = l.complex.top_simplices[0]
    if any(set(s) == set(base) for s in l.complex.top_simplices[1:]):
        raise DegenerateBase(f"another top simplex repeats the base facet {base}", witness=list(base))
    labels = [n] * l.complex.vertex_count
    for k, v in enumerate(base):
        labels[v] = k
    return SimplicialMap(source=l.complex, target=boundary_of_simplex(n), vertex_map=tuple(labels))


def induced_subdivision_map(f: SimplicialMap, sub1: Subdivision, sub2: Subdivision) -> SimplicialMap:
    """f: K1 -> K2 induces K1' -> K2' (face -> image face)."""
    target_id = {face: i for i, face in enumerate(sub2.faces)}
    vertex_map = tuple(target_id[f.image(face)] for face in sub1.faces)
    return SimplicialMap(source=sub1.complex, target=sub2.complex, vertex_map=vertex_map)


# Complexes standards

def boundary_of_simplex(n: int) -> AbstractComplex:
    """The (n-1)-sphere on n+1 vertices."""
    return AbstractComplex.from_simplices(itertools.combinations(range(n + 1), n), vertex_count=n + 1)


def simplex_complex(n: int) -> AbstractComplex:
    return AbstractComplex.from_simplices([tuple(range(n + 1))])


def cycle_complex(m: int) -> AbstractComplex:
    return AbstractComplex.from_simplices([(i, (i + 1) % m) for i in range(m)], vertex_count=m)
