import pytest

from errors import InvalidCharacteristic, RankDeficient, ZeroDegreeInput
from permutahedron import dual_complex, size
from simplicial import AbstractComplex, SimplicialMap, boundary_of_simplex, cycle_complex, identity_map, validate_pseudo_manifold
from small_cover import (
    SimpleCellInput,
    XorBasis,
    build_quotient,
    euler_and_local_check,
    facet_coloring_search,
    flag_square_predicates,
    gf2_rank,
    induced_domination,
    quotient_subdivision,
    real_moment_angle,
    small_cover,
    summarize_quotient,
    validate_characteristic,
)

B1, B2, B3 = 0b001, 0b010, 0b100


def square():
    return SimpleCellInput.of(cycle_complex(4))


# === Fonctions caractéristiques ===

def test_gf2_rank():
    assert gf2_rank([B1, B2, B1 ^ B2], 2) == 2
    assert gf2_rank([B1, B1], 2) == 1
    assert gf2_rank([], 3) == 0


def test_xor_basis_representatives():
    basis = XorBasis([0b011, 0b110])
    assert basis.dim == 2
    reps = basis.representatives(3)
    assert len(reps) == 2
    assert {basis.canonical(g) for g in range(8)} == set(reps)


def test_square_characteristic():
    assert validate_characteristic(square(), [B1, B2, B1, B2])
    with pytest.raises(RankDeficient) as exc:
        validate_characteristic(square(), [B1, B1, B2, B2])
    assert exc.value.witness == [0, 1]


def test_characteristic_value_checks():
    with pytest.raises(InvalidCharacteristic):
        validate_characteristic(square(), [B1, B2, B1])
    with pytest.raises(InvalidCharacteristic):
        validate_characteristic(square(), [B1, 0, B1, B2])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_size_coloring_of_the_permutahedron_is_characteristic(n):
    dual = dual_complex(n)
    cell = SimpleCellInput.of(dual.complex)
    values = [1 << (size(w) - 1) for w in dual.omegas]
    assert validate_characteristic(cell, values)


# === Quotients ===

def test_segment_real_moment_angle_is_a_square():
    segment = SimpleCellInput.of(AbstractComplex.from_simplices([(0,), (1,)]))
    q = real_moment_angle(segment)
    assert q.f_vector() == (4, 4)
    assert q.euler() == 0
    summary = summarize_quotient(q)
    assert summary.pseudo_manifold
    assert summary.local_ok


def test_triangle_real_moment_angle_is_an_octahedron():
    q = real_moment_angle(SimpleCellInput.of(cycle_complex(3)))
    assert q.f_vector() == (6, 12, 8)
    chi, local = euler_and_local_check(q)
    assert chi == 2
    assert local.ok
    summary = summarize_quotient(q)
    assert summary.pseudo_manifold
    assert summary.orientable
    assert summary.parity_orientation_ok


def test_square_small_cover_is_a_torus():
    q = small_cover(square(), [B1, B2, B1, B2])
    assert q.f_vector() == (4, 8, 4)
    chi, local = euler_and_local_check(q)
    assert chi == 0
    assert local.ok and local.expected == 4
    sub = quotient_subdivision(q)
    assert validate_pseudo_manifold(sub.complex).strongly_connected
    assert summarize_quotient(q).parity_orientation_ok


def test_small_cover_rejects_bad_characteristic():
    with pytest.raises(InvalidCharacteristic):
        small_cover(square(), [B1, B1, B2, B2])


@pytest.mark.parametrize("m", range(3, 9))
def test_euler_characteristic_of_polygons(m):
    q = real_moment_angle(SimpleCellInput.of(cycle_complex(m)))
    chi, local = euler_and_local_check(q)
    assert chi == 2 ** (m - 2) * (4 - m)
    assert local.ok


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_simplex_vertices_lie_in_2n_cells(n):
    q = real_moment_angle(SimpleCellInput.of(boundary_of_simplex(n)))
    chi, local = euler_and_local_check(q)
    assert q.f_vector()[-1] == 2 ** (n + 1)
    assert chi == 1 + (-1) ** n
    assert local.expected == 2 ** n
    assert local.ok


def test_build_quotient_checks_assignment_length():
    with pytest.raises(InvalidCharacteristic):
        build_quotient(square(), [B1, B2], 2)


# === Domination ===

def test_identity_domination():
    z = validate_pseudo_manifold(cycle_complex(4))
    result = induced_domination(identity_map(z.complex), z, z)
    assert abs(result.degree) == 1
    assert result.matches_expected


def test_double_wrap_domination():
    z1 = validate_pseudo_manifold(cycle_complex(6))
    z2 = validate_pseudo_manifold(cycle_complex(3))
    wrap = SimplicialMap(z1.complex, z2.complex, (0, 1, 2, 0, 1, 2))
    result = induced_domination(wrap, z1, z2)
    assert abs(result.degree) == 16
    assert result.degree == 2 ** (6 - 3) * result.map_degree
    assert result.matches_expected
    assert len(result.images) == 2 ** 6
    assert all(type(h) is int for h in result.images)
    assert result.images[0b000001] == 0b001
    assert result.images[0b001001] == 0
    assert result.images[0b010001] == 0b011


def test_domination_degree_is_the_same_on_every_target_cell():
    z1 = validate_pseudo_manifold(cycle_complex(12))
    z2 = validate_pseudo_manifold(cycle_complex(4))
    wrap = SimplicialMap(z1.complex, z2.complex, tuple(i % 4 for i in range(12)))
    result = induced_domination(wrap, z1, z2)
    assert abs(result.map_degree) == 3
    assert result.degree == 2 ** 8 * result.map_degree
    assert result.expected == result.degree


def test_fold_is_rejected():
    z1 = validate_pseudo_manifold(cycle_complex(6))
    z2 = validate_pseudo_manifold(cycle_complex(3))
    fold = SimplicialMap(z1.complex, z2.complex, (0, 1, 2, 1, 0, 1))
    with pytest.raises(ZeroDegreeInput):
        induced_domination(fold, z1, z2)


# === Prédicats ===

def test_flag_square_predicates():
    triangle = flag_square_predicates(cycle_complex(3))
    assert not triangle.is_flag
    assert triangle.missing_faces == [(0, 1, 2)]

    four = flag_square_predicates(cycle_complex(4))
    assert four.is_flag
    assert four.has_empty_square
    assert four.empty_squares == [(0, 1, 2, 3)]

    five = flag_square_predicates(cycle_complex(5))
    assert five.is_flag
    assert not five.has_empty_square


def test_facet_coloring_search():
    assert facet_coloring_search(cycle_complex(4), 2) is not None
    assert facet_coloring_search(cycle_complex(5), 2) is None


@pytest.mark.parametrize("n", [2, 3])
def test_permutahedron_coloring_is_unique(n):
    dual = dual_complex(n)
    colors = facet_coloring_search(dual.complex, n)
    assert colors is not None
    by_size = {}
    for w, c in zip(dual.omegas, colors):
        by_size.setdefault(size(w), set()).add(c)
    assert all(len(cs) == 1 for cs in by_size.values())
    assert len({next(iter(cs)) for cs in by_size.values()}) == n
