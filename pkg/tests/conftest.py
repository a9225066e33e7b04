import itertools
import math
from typing import Optional

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from simplicial import AbstractComplex, boundary_of_simplex, cycle_complex, validate_pseudo_manifold

GOLDEN = (1 + math.sqrt(5)) / 2

# Triangulation minimale du plan projectif (6 sommets, 10 triangles)
RP2_6 = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
    (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
]


def torus_7():
    tops = []
    for i in range(7):
        tops.append((i, (i + 1) % 7, (i + 3) % 7))
        tops.append((i, (i + 2) % 7, (i + 3) % 7))
    return AbstractComplex.from_simplices(tops, vertex_count=7)


def icosahedron_points() -> np.ndarray:
    points = []
    for a, b in itertools.product((-1.0, 1.0), repeat=2):
        points.extend([(0.0, a, b * GOLDEN), (a, b * GOLDEN, 0.0), (b * GOLDEN, 0.0, a)])
    return np.array(points)


def circle_placement(m: int, step_deg: Optional[float] = None, offset: float = 0.0) -> np.ndarray:
    step = math.radians(360.0 / m if step_deg is None else step_deg)
    return np.array([[math.cos(offset + k * step), math.sin(offset + k * step)] for k in range(m)])


@pytest.fixture
def tetra_boundary():
    return boundary_of_simplex(3)


@pytest.fixture
def rp2():
    return AbstractComplex.from_simplices(RP2_6, vertex_count=6)


@pytest.fixture
def torus():
    return torus_7()


@pytest.fixture
def hexagon():
    return validate_pseudo_manifold(cycle_complex(6))


def icosahedron_sphere():
    points = icosahedron_points()
    hull = ConvexHull(points)
    complex_ = AbstractComplex.from_simplices(hull.simplices.tolist(), vertex_count=len(points))
    return validate_pseudo_manifold(complex_), points / np.linalg.norm(points, axis=1)[:, None]


@pytest.fixture
def icosahedron():
    return icosahedron_sphere()


@pytest.fixture
def wedge_of_tetrahedra():
    first = list(itertools.combinations(range(4), 3))
    second = list(itertools.combinations(range(3, 7), 3))
    return AbstractComplex.from_simplices(first + second, vertex_count=7)
