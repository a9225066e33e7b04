import dataclasses
import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import BudgetExhausted, InvalidPairing, IrregularColoring, PreconditionFailed
from permutahedron import mask_of
from realization import (
    algebra_crosscheck,
    build_pairings,
    circle_winding,
    decode,
    encode,
    enumerate_covering,
    initial_state,
    local_checks,
    pairings_from_images,
    prepare_input,
    replay,
    state_via_algebra,
    states_equal,
    transition,
    verify_certificate,
)
from simplicial import boundary_of_simplex, cycle_complex, validate_pseudo_manifold

ALTERNATING = [1, 2, 1, 2, 1, 2]


@pytest.fixture
def hexagon_input(hexagon):
    return prepare_input(hexagon, colors=ALTERNATING)


@pytest.fixture
def hexagon_atlas(hexagon_input):
    family = build_pairings(hexagon_input)
    return enumerate_covering(hexagon_input, family, budget=10_000)


# === Entrée ===

def test_prepare_input_keeps_a_regular_coloring(hexagon_input):
    assert not hexagon_input.subdivided
    assert hexagon_input.n == 1
    assert hexagon_input.simplex_count == 6
    assert hexagon_input.white[hexagon_input.base]
    assert hexagon_input.white.sum() == 3


def test_prepare_input_subdivides_uncolored_cycles():
    z = validate_pseudo_manifold(boundary_of_simplex(2))
    inp = prepare_input(z)
    assert inp.subdivided
    assert inp.simplex_count == 6


def test_prepare_input_rejects_bad_colors(hexagon):
    with pytest.raises(IrregularColoring):
        prepare_input(hexagon, colors=[1, 1, 2, 2, 1, 2])
    assert prepare_input(hexagon, colors=[1, 1, 2, 2, 1, 2], auto_subdivide=True).subdivided


# === Appariements ===

def test_pairings_swap_colors_and_share_faces(hexagon_input):
    family = build_pairings(hexagon_input)
    for omega in family.omegas:
        lam = family.of(omega)
        assert (lam[lam] == np.arange(6)).all()
        assert (hexagon_input.white[lam] != hexagon_input.white).all()
        for i in range(6):
            assert hexagon_input.type_face(i, omega) == hexagon_input.type_face(int(lam[i]), omega)


def test_random_pairings_are_valid():
    z = validate_pseudo_manifold(boundary_of_simplex(3))
    inp = prepare_input(z)
    family = build_pairings(inp, policy="random", seed=3)
    assert family.maps.shape == (6, 24)


def test_unknown_policy(hexagon_input):
    with pytest.raises(PreconditionFailed):
        build_pairings(hexagon_input, policy="greedy")


def test_user_pairing_must_swap_colors(hexagon_input):
    with pytest.raises(InvalidPairing) as exc:
        pairings_from_images(hexagon_input, {mask_of([1]): list(range(6))})
    assert exc.value.witness == [0, [1]]


# === États ===

def test_transitions_are_involutions(hexagon_input):
    family = build_pairings(hexagon_input)
    s0 = initial_state(family)
    for omega in family.omegas:
        s1 = transition(s0, omega, family)
        assert s1.r == 1
        assert states_equal(transition(s1, omega, family), s0)


def test_state_key_round_trip(hexagon_input):
    family = build_pairings(hexagon_input)
    state = transition(initial_state(family), mask_of([2]), family)
    assert states_equal(decode(encode(state), family), state)
    with pytest.raises(PreconditionFailed):
        decode(encode(state)[:-1], family)


def test_replay_matches_the_algebra():
    z = validate_pseudo_manifold(boundary_of_simplex(3))
    inp = prepare_input(z)
    family = build_pairings(inp)
    rng = random.Random(5)
    for _ in range(25):
        word = tuple(rng.choice(family.omegas) for _ in range(rng.randint(0, 7)))
        assert states_equal(replay(word, family), state_via_algebra(word, family))


# === Revêtement ===

def test_hexagon_covering(hexagon_input, hexagon_atlas):
    assert hexagon_atlas.complete
    certificate = verify_certificate(hexagon_atlas, hexagon_input)
    assert certificate.passed
    assert certificate.cells % 6 == 0
    assert certificate.k == certificate.cells // 6
    assert certificate.fiber_counts == [certificate.k] * 6
    assert certificate.projection_fiber * 2 == certificate.cells
    assert abs(circle_winding(hexagon_atlas, hexagon_input)) == certificate.k


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_even_polygon_coverings(k):
    z = validate_pseudo_manifold(cycle_complex(2 * k))
    inp = prepare_input(z, colors=[1, 2] * k)
    atlas = enumerate_covering(inp, build_pairings(inp), budget=1_000_000)
    assert atlas.complete
    certificate = verify_certificate(atlas, inp)
    assert certificate.passed
    assert certificate.k >= 1
    assert certificate.cells == 2 * k * certificate.k
    assert certificate.fiber_counts == [certificate.k] * (2 * k)
    assert abs(circle_winding(atlas, inp)) == certificate.k


def test_triangle_boundary_covering_after_subdivision():
    inp = prepare_input(validate_pseudo_manifold(boundary_of_simplex(2)), auto_subdivide=True)
    atlas = enumerate_covering(inp, build_pairings(inp), budget=10_000)
    certificate = verify_certificate(atlas, inp)
    assert certificate.passed
    assert certificate.k >= 1


def test_tetrahedron_boundary_local_checks():
    inp = prepare_input(validate_pseudo_manifold(boundary_of_simplex(3)))
    atlas = enumerate_covering(inp, build_pairings(inp), budget=3000)
    checks = local_checks(atlas, inp)
    assert all(check.passed for check in checks.values())
    certificate = verify_certificate(atlas, inp)
    assert certificate.passed
    if atlas.complete:
        assert certificate.k is not None


def test_budget_gives_a_partial_atlas(hexagon_input):
    family = build_pairings(hexagon_input)
    atlas = enumerate_covering(hexagon_input, family, budget=1)
    assert not atlas.complete
    assert atlas.size == 1
    certificate = verify_certificate(atlas, hexagon_input)
    assert not certificate.complete
    assert certificate.k is None
    with pytest.raises(BudgetExhausted):
        enumerate_covering(hexagon_input, family, budget=1, strict=True)
    with pytest.raises(PreconditionFailed):
        enumerate_covering(hexagon_input, family, budget=0)


def test_corrupted_transition_breaks_well_definedness(hexagon_input, hexagon_atlas):
    family = hexagon_atlas.family
    omega = family.omegas[0]
    p = hexagon_atlas.base_images(hexagon_input.base)
    face = hexagon_input.type_face(int(p[0]), omega)
    other = next(s for s in range(hexagon_atlas.size) if hexagon_input.type_face(int(p[s]), omega) != face)
    transitions = hexagon_atlas.transitions.copy()
    transitions[0, 0] = other
    corrupted = dataclasses.replace(hexagon_atlas, transitions=transitions)
    checks = local_checks(corrupted, hexagon_input)
    assert not checks["well_defined"].passed
    assert checks["well_defined"].witness == [0, [1]]


def test_winding_needs_a_circle():
    inp = prepare_input(validate_pseudo_manifold(boundary_of_simplex(3)))
    atlas = enumerate_covering(inp, build_pairings(inp), budget=1)
    with pytest.raises(PreconditionFailed):
        circle_winding(atlas, inp)


# === Contrôles croisés ===

def test_algebra_crosscheck_on_hexagon(hexagon_input):
    family = build_pairings(hexagon_input)
    report = algebra_crosscheck(hexagon_input, family, trials=30, max_len=6, seed=2)
    assert report.ok
    assert report.checks["state_replay"] == 30


# === Table des transitions ===

@pytest.fixture(scope="module")
def tetra_atlas():
    inp = prepare_input(validate_pseudo_manifold(boundary_of_simplex(3)))
    return inp, enumerate_covering(inp, build_pairings(inp), budget=100_000)


def test_subdivided_tetrahedron_covering_is_complete(tetra_atlas):
    inp, atlas = tetra_atlas
    assert inp.simplex_count == 24
    assert atlas.complete
    certificate = verify_certificate(atlas, inp)
    assert certificate.passed
    assert certificate.k >= 1
    assert certificate.cells == 24 * certificate.k


def test_every_transition_is_a_fixed_point_free_involution(hexagon_atlas, tetra_atlas):
    for atlas in (hexagon_atlas, tetra_atlas[1]):
        T = atlas.transitions
        rows = np.arange(atlas.size)
        assert (T >= 0).all()
        for j in range(T.shape[1]):
            assert (T[T[:, j], j] == rows).all()
            assert (T[:, j] != rows).all()


def test_transition_table_matches_transition(tetra_atlas):
    _, atlas = tetra_atlas
    family = atlas.family
    rng = random.Random(0)
    for i in rng.sample(range(atlas.size), min(atlas.size, 40)):
        state = atlas.state(i)
        for j, omega in enumerate(family.omegas):
            assert states_equal(transition(state, omega, family), atlas.state(int(atlas.transitions[i, j])))


def relators(omegas):
    """x_w^2 for every w and (x_a x_b)^2 for comparable a != b, as column indices."""
    words = [(j, j) for j in range(len(omegas))]
    for a, b in itertools.combinations(range(len(omegas)), 2):
        if omegas[a] & omegas[b] in (omegas[a], omegas[b]):
            words.append((a, b, a, b))
    return words


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_relator_words_fix_every_state(tetra_atlas, data):
    _, atlas = tetra_atlas
    family = atlas.family
    k = len(family.omegas)
    word = []
    for _ in range(data.draw(st.integers(1, 4))):
        conjugator = data.draw(st.lists(st.integers(0, k - 1), max_size=5))
        word += conjugator + list(data.draw(st.sampled_from(relators(family.omegas)))) + conjugator[::-1]

    states = np.arange(atlas.size)
    for j in word:
        states = atlas.transitions[states, j]
    assert (states == np.arange(atlas.size)).all()
    letters = tuple(family.omegas[j] for j in word)
    assert states_equal(replay(letters, family), initial_state(family))
