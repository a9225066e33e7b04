"""Nonzero-degree simplicial maps from spherical placements.

A placement sends every vertex of an (n-1)-dimensional pseudo-manifold K to a
unit vector of R^n; the simplexwise geodesic extension is the spherical map
whose degree and fineness are certified here.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np
from sympy import Matrix, Rational

import settings
from errors import (
    BoundViolated,
    DegenerateSimplex,
    DiameterExceeded,
    NonzeroDegreeFailed,
    NotFlag,
    NotSimplicial,
    PreconditionFailed,
    ZeroNorm,
)
from permutahedron import DualComplex, RadialChart, constants, dual_complex, members, radial_chart
from simplicial import OrientedPseudoManifold, SimplicialMap, map_degree, validate_pseudo_manifold
from small_cover import DominationResult, flag_square_predicates, induced_domination

logger = logging.getLogger(__name__)


def normalize(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ZeroNorm("cannot normalize the zero vector")
    return v / norm


def spherical_distance(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


def spherical_barycentric(xis: Sequence[Sequence[float]], betas: Sequence[float], tolerance: float = 1e-12) -> np.ndarray:
    """Normalized combination sum(beta_i xi_i) / |sum(beta_i xi_i)|."""
    xis = np.asarray(xis, dtype=float)
    betas = np.asarray(betas, dtype=float)
    if (betas < 0).any() or abs(betas.sum() - 1) > 1e-9:
        raise PreconditionFailed("weights must be nonnegative and sum to 1")
    combined = betas @ xis
    if np.linalg.norm(combined) <= tolerance:
        raise ZeroNorm("weighted sum vanishes", witness=betas.tolist())
    return combined / np.linalg.norm(combined)


@dataclass
class FineData:
    z: OrientedPseudoManifold
    placement: np.ndarray           # (m, n), vecteurs unitaires
    eps: float
    exact_placement: Optional[List[List[Rational]]] = None

    def __post_init__(self):
        self.placement = np.asarray(self.placement, dtype=float)
        if self.placement.shape[0] != self.z.complex.vertex_count:
            raise PreconditionFailed("placement must give one vector per vertex")
        if self.placement.shape[1] != self.z.dim + 1:
            raise PreconditionFailed(f"a {self.z.dim}-dimensional complex needs vectors in R^{self.z.dim + 1}")
        if self.eps > math.pi / 2 + 1e-12:
            raise PreconditionFailed(f"eps = {self.eps} exceeds pi/2")
        norms = np.linalg.norm(self.placement, axis=1)
        if (norms == 0).any():
            raise ZeroNorm("placement contains the zero vector")
        self.placement = self.placement / norms[:, None]

    @property
    def n(self) -> int:
        return self.placement.shape[1]


class FineCertificate(NamedTuple):
    passed: bool
    degree: int
    max_distance: float
    worst_simplex: Tuple[int, ...]
    probes: int


def _cos_exceeds(u: Sequence[Rational], v: Sequence[Rational], cos_eps: mpmath.mpf) -> bool:
    """cos of the angle between rational directions, compared at 128 bits."""
    with mpmath.workprec(128):
        dot = sum(a * b for a, b in zip(u, v))
        nu = sum(a * a for a in u)
        nv = sum(b * b for b in v)
        value = mpmath.mpf(dot.p) / dot.q / mpmath.sqrt((mpmath.mpf(nu.p) / nu.q) * (mpmath.mpf(nv.p) / nv.q))
        return value > cos_eps


def check_distances(data: FineData, tolerance: float) -> Tuple[float, Tuple[int, ...]]:
    """Largest vertex distance inside a simplex; raises when some pair is not below eps."""
    worst, worst_simplex = 0.0, ()
    cos_eps = None
    if data.exact_placement is not None:
        with mpmath.workprec(128):
            cos_eps = mpmath.cos(mpmath.mpf(data.eps))
    for simplex in data.z.complex.top_simplices:
        for i, u in enumerate(simplex):
            for v in simplex[i + 1:]:
                d = spherical_distance(data.placement[u], data.placement[v])
                if d > worst:
                    worst, worst_simplex = d, simplex
                if cos_eps is not None:
                    ok = _cos_exceeds(data.exact_placement[u], data.exact_placement[v], cos_eps)
                else:
                    ok = d < data.eps - tolerance
                if not ok:
                    raise DiameterExceeded(
                        f"vertices {u}, {v} of {simplex} are {d:.12f} apart, eps = {data.eps:.12f}",
                        witness={"simplex": list(simplex), "distance": d},
                    )
    return worst, worst_simplex


def _probe_count_float(z: OrientedPseudoManifold, vectors: np.ndarray, probe: np.ndarray, margin: float) -> Optional[int]:
    tops = np.array(z.complex.top_simplices)
    frames = vectors[tops]                          # (T, n, n), lignes = sommets
    dets = np.linalg.det(frames)
    good = np.abs(dets) > margin
    betas = np.zeros((len(tops), vectors.shape[1]))
    if good.any():
        systems = frames[good].transpose(0, 2, 1)
        betas[good] = np.linalg.solve(systems, np.broadcast_to(probe, (good.sum(), len(probe)))[..., None])[..., 0]
    near = good & (betas > -margin).all(axis=1) & (np.abs(betas) <= margin).any(axis=1)
    if near.any():
        return None
    inside = good & (betas > margin).all(axis=1)
    signs = np.array(z.orientation)
    return int((np.sign(dets[inside]) * signs[inside]).sum())


def _probe_count_exact(z: OrientedPseudoManifold, vectors: List[List[Rational]], probe: List[Rational]) -> Optional[int]:
    total = 0
    target = Matrix(probe)
    for i, simplex in enumerate(z.complex.top_simplices):
        frame = Matrix([vectors[v] for v in simplex])
        det = frame.det()
        if det == 0:
            continue
        betas = frame.T.LUsolve(target)
        if any(b == 0 for b in betas) and all(b >= 0 for b in betas):
            return None
        if all(b > 0 for b in betas):
            total += (1 if det > 0 else -1) * z.sign(i)
    return total


def spherical_degree(
    z: OrientedPseudoManifold,
    vectors: np.ndarray,
    seed: int = 0,
    margin: float = 1e-9,
    exact_vectors: Optional[List[List[Rational]]] = None,
    attempts: int = 20,
) -> Tuple[int, int]:
    """Signed count of spherical simplices over two agreeing generic probes; returns (degree, probes used)."""
    rng = np.random.default_rng(seed)
    found: List[int] = []
    for attempt in range(1, attempts + 1):
        probe = rng.standard_normal(vectors.shape[1])
        if exact_vectors is not None:
            rational = [Rational(int(x * 2 ** 20), 2 ** 20) for x in probe]
            count = _probe_count_exact(z, exact_vectors, rational)
        else:
            count = _probe_count_float(z, vectors, probe / np.linalg.norm(probe), margin)
        if count is None:
            logger.warning(f"probe {attempt} is too close to a simplex boundary, reprobing")
            continue
        found.append(count)
        if len(found) >= 2 and found[-1] == found[-2]:
            return count, attempt
    raise DegenerateSimplex(f"no two consistent generic probes among {attempts}", witness=found)


def fine_certificate(
    data: FineData,
    seed: int = 0,
    tolerance: float = settings.DEFAULT_TOLERANCE,
) -> FineCertificate:
    if data.z.orientation is None:
        raise PreconditionFailed("fineness certificate needs an oriented pseudo-manifold")
    worst, worst_simplex = check_distances(data, tolerance)
    degree, probes = spherical_degree(data.z, data.placement, seed=seed, exact_vectors=data.exact_placement)
    logger.info(f"fine certificate: eps = {data.eps:.6f}, max distance {worst:.6f}, degree {degree}")
    return FineCertificate(
        passed=degree != 0,
        degree=degree,
        max_distance=worst,
        worst_simplex=worst_simplex,
        probes=probes,
    )


def inradius_fine(
    k_p: OrientedPseudoManifold,
    xis: Sequence[Sequence[float]],
    sinh_rho: float,
    tolerance: float = settings.DEFAULT_TOLERANCE,
) -> FineData:
    """Fine data from the facet directions of a polytope containing a ball of radius rho.

    eps = 2 arccot(sinh rho); intersecting facets must have directions closer than eps.
    """
    if sinh_rho <= 0:
        raise PreconditionFailed("sinh(rho) must be positive")
    eps = 2 * math.atan(1 / sinh_rho)
    vectors = np.array([normalize(x) for x in xis])
    for u, v in k_p.complex.edges():
        d = spherical_distance(vectors[u], vectors[v])
        if d >= eps - tolerance:
            raise BoundViolated(
                f"intersecting facets {u}, {v} have directions {d:.12f} apart, eps = {eps:.12f}",
                witness=[u, v],
            )
    return FineData(z=k_p, placement=vectors, eps=eps)


# === Carte creuse du permutoèdre ===

@dataclass
class SparseChart:
    n: int
    radial: RadialChart
    dual: DualComplex
    target: OrientedPseudoManifold
    eps: float
    diameter_bound: float
    flag: bool


def _facet_directions(chart: RadialChart) -> np.ndarray:
    """Direction of the foot of the perpendicular from o to every facet, in R^n."""
    rows = []
    for omega in chart.omegas:
        normal = np.array([1.0 if c in members(omega) else 0.0 for c in range(1, chart.n + 2)])
        rows.append(normalize(chart.basis @ (normal - normal.mean())))
    return np.array(rows)


def permutahedron_chart(n: int, tolerance: float = settings.DEFAULT_TOLERANCE) -> SparseChart:
    radial = radial_chart(n, tolerance=tolerance)
    dual = dual_complex(n)
    target = validate_pseudo_manifold(dual.complex)
    # orientation de K_{Pi^n} alignée sur la sphère
    degree, _ = spherical_degree(target, _facet_directions(radial))
    if degree < 0:
        target = target.flipped()
    return SparseChart(
        n=n,
        radial=radial,
        dual=dual,
        target=target,
        eps=radial.eps,
        diameter_bound=radial.diameter_bound,
        flag=flag_square_predicates(dual.complex).is_flag,
    )


class PhiResult(NamedTuple):
    map: SimplicialMap
    degree: int
    fine_degree: Optional[int]
    homotopy_margin: float
    ambiguous_vertices: List[int]


def construct_phi(
    fine: FineData,
    chart: SparseChart,
    tolerance: float = settings.DEFAULT_TOLERANCE,
    fine_degree: Optional[int] = None,
) -> PhiResult:
    """Send every vertex to a region containing its placed direction (least index on ties)."""
    if fine.eps > chart.eps + tolerance:
        raise PreconditionFailed(f"placement is only {fine.eps:.12f}-fine, chart needs {chart.eps:.12f}", witness=fine.eps)
    if not chart.flag:
        raise NotFlag("target complex is not flag")
    if fine.n != chart.n:
        raise PreconditionFailed(f"placement lives in R^{fine.n}, chart in R^{chart.n}")
    if chart.diameter_bound > math.pi - fine.eps + tolerance:
        raise PreconditionFailed("region diameter bound exceeds pi - eps")

    images, ambiguous = [], []
    for u, direction in enumerate(fine.placement):
        regions = chart.radial.regions(direction)
        if len(regions) > 1:
            ambiguous.append(u)
        images.append(min(regions))
    phi = SimplicialMap(source=fine.z.complex, target=chart.dual.complex, vertex_map=tuple(images))

    bad = phi.non_simplicial()
    if bad:
        raise NotSimplicial(f"{len(bad)} simplices map onto non-adjacent regions", witness=[list(s) for s in bad])

    worst = 0.0
    for simplex in fine.z.complex.top_simplices:
        for u in simplex:
            for v in simplex:
                worst = max(worst, spherical_distance(fine.placement[u], fine.placement[v]))
    margin = math.pi - (worst + chart.diameter_bound)
    if margin <= 0:
        raise PreconditionFailed(f"homotopy bound fails with margin {margin:.3e}")

    degree = map_degree(phi, fine.z, chart.target)
    if degree == 0:
        raise NonzeroDegreeFailed(
            "synthesized simplicial map has degree 0",
            witness={"images": list(images), "ambiguous": ambiguous, "fine_degree": fine_degree},
        )
    logger.info(f"phi: degree {degree}, {len(ambiguous)} vertices on region boundaries, margin {margin:.4f}")
    return PhiResult(map=phi, degree=degree, fine_degree=fine_degree, homotopy_margin=margin, ambiguous_vertices=ambiguous)


class PipelineReport(NamedTuple):
    n: int
    eps: float
    eps_n: float
    phi: PhiResult
    domination: DominationResult

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "eps_n": self.eps_n,
            "phi_degree": self.phi.degree,
            "fine_degree": self.phi.fine_degree,
            "homotopy_margin": self.phi.homotopy_margin,
            "vertex_map": list(self.phi.map.vertex_map),
            "m1": self.domination.m1,
            "m2": self.domination.m2,
            "degree": self.domination.degree,
            "expected": self.domination.expected,
        }


def dominate_via_permutahedron(
    fine: FineData,
    seed: int = 0,
    tolerance: float = settings.DEFAULT_TOLERANCE,
) -> PipelineReport:
    """Fine placement of K_P -> simplicial map into K_{Pi^n} -> domination R_P >= R_{Pi^n}."""
    n = fine.n
    eps_n = float(constants(n).eps)
    if fine.eps > eps_n + tolerance:
        raise PreconditionFailed(f"placement is {fine.eps:.12f}-fine, domination needs eps_{n} = {eps_n:.12f}", witness=fine.eps)
    certificate = fine_certificate(fine, seed=seed, tolerance=tolerance)
    chart = permutahedron_chart(n, tolerance=tolerance)
    phi = construct_phi(fine, chart, tolerance=tolerance, fine_degree=certificate.degree)

    iso = chart.dual.iso
    target = validate_pseudo_manifold(iso.target)
    if map_degree(iso, chart.target, target) < 0:
        target = target.flipped()
    composite = phi.map.then(iso)
    domination = induced_domination(composite, fine.z, target)
    return PipelineReport(n=n, eps=fine.eps, eps_n=eps_n, phi=phi, domination=domination)
