"""Finite covers realizing a multiple of a colored pseudo-manifold cycle.

A state (c, a, r) stands for one permutahedral cell of the cover: c[j] is the
permutation attached to the j-th subset of colors, a sends the base simplex to
the simplex the cell maps onto, r is the image in Z_2^n. Permutations are numpy
arrays over the top simplices of Z in their sorted order.
"""
import logging
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from coxeter import FiniteQuotientAction, apply_aut, invert_aut, verify_section4, word_product
from errors import (
    BudgetExhausted,
    InconsistentDegree,
    InvalidPairing,
    IrregularColoring,
    NonOrientable,
    NotStronglyConnected,
    PreconditionFailed,
    UnbalancedStar,
)
from permutahedron import members, omega_list, omega_poset, size
from schemas import AlgebraReport, CheckResult, Counterexample, RealizationCertificate
from simplicial import (
    ChessColoring,
    OrientedPseudoManifold,
    VertexColoring,
    barycentric_subdivide,
    chess_coloring,
    star_balance_violations,
    subdivide_orientation,
    type_face,
)

logger = logging.getLogger(__name__)


# === Entrée colorée ===

@dataclass
class ColoredCycleInput:
    z: OrientedPseudoManifold
    coloring: VertexColoring
    chess: ChessColoring
    base: int
    subdivided: bool = False

    @property
    def n(self) -> int:
        return self.z.dim

    @property
    def simplex_count(self) -> int:
        return len(self.z.complex.top_simplices)

    @cached_property
    def white(self) -> np.ndarray:
        white = np.zeros(self.simplex_count, dtype=bool)
        white[list(self.chess.plus)] = True
        return white

    def type_face(self, i: int, omega: int):
        return type_face(self.z.complex.top_simplices[i], members(omega), self.coloring)


def _colors_fit(z: OrientedPseudoManifold, coloring: VertexColoring) -> bool:
    wanted = set(range(1, z.dim + 2))
    return coloring.regular and all(
        {coloring.color(v) for v in s} == wanted for s in z.complex.top_simplices
    )


def prepare_input(
    z: OrientedPseudoManifold,
    colors: Optional[Sequence[int]] = None,
    auto_subdivide: bool = False,
) -> ColoredCycleInput:
    """Check Z, pick the chess coloring and the base simplex; subdivide when there is no usable coloring."""
    if not z.strongly_connected:
        raise NotStronglyConnected("realization needs a strongly connected pseudo-manifold")
    if z.orientation is None:
        raise NonOrientable("realization needs an oriented pseudo-manifold")

    subdivided = False
    coloring = VertexColoring.check(z.complex, colors) if colors is not None else None
    if coloring is None or not _colors_fit(z, coloring):
        if coloring is not None and not auto_subdivide:
            raise IrregularColoring(f"coloring is not a regular coloring in {z.dim + 1} colors")
        logger.warning("no regular coloring: replacing Z with its barycentric subdivision")
        sub = barycentric_subdivide(z.complex)
        z = subdivide_orientation(z, sub)
        coloring = sub.coloring
        subdivided = True

    chess = chess_coloring(z, coloring)
    unbalanced = star_balance_violations(z, chess)
    if unbalanced:
        face, plus, minus = unbalanced[0]
        raise UnbalancedStar(f"star of {face} has {plus} white and {minus} black simplices", witness=list(face))
    return ColoredCycleInput(z=z, coloring=coloring, chess=chess, base=chess.plus[0], subdivided=subdivided)


# === Appariements ===

@dataclass(eq=False)
class PairingFamily:
    n: int
    omegas: List[int]
    maps: np.ndarray  # (|Omega|, |A|): ligne j = lambda_{omega_j}

    @cached_property
    def position(self) -> Dict[int, int]:
        return {omega: j for j, omega in enumerate(self.omegas)}

    @cached_property
    def below(self) -> List[np.ndarray]:
        """Indices of the proper subsets of each omega."""
        return [
            np.array([i for i, gamma in enumerate(self.omegas) if gamma != omega and gamma & omega == gamma], dtype=np.intp)
            for omega in self.omegas
        ]

    @cached_property
    def dtype(self):
        return np.uint8 if self.maps.shape[1] <= 256 else np.uint16

    def of(self, omega: int) -> np.ndarray:
        return self.maps[self.position[omega]]


def _type_groups(inp: ColoredCycleInput, omega: int) -> Dict[Tuple[int, ...], List[int]]:
    groups: Dict[Tuple[int, ...], List[int]] = {}
    for i in range(inp.simplex_count):
        groups.setdefault(inp.type_face(i, omega), []).append(i)
    return groups


def build_pairings(inp: ColoredCycleInput, policy: str = "canonical", seed: int = 0) -> PairingFamily:
    """Match white and black simplices around every face of type omega.

    `canonical` matches both sides in sorted order; `random` shuffles the black
    side with the given seed (any legal matching works).
    """
    if policy not in ("canonical", "random"):
        raise PreconditionFailed(f"unknown pairing policy {policy!r}")
    rng = random.Random(seed)
    omegas = omega_list(inp.n)
    maps = np.zeros((len(omegas), inp.simplex_count), dtype=np.int64)
    for j, omega in enumerate(omegas):
        for face, group in sorted(_type_groups(inp, omega).items()):
            whites = [i for i in group if inp.white[i]]
            blacks = [i for i in group if not inp.white[i]]
            if len(whites) != len(blacks):
                raise UnbalancedStar(
                    f"face {face} of type {members(omega)} has {len(whites)} white and {len(blacks)} black simplices",
                    witness=list(face),
                )
            if policy == "random":
                rng.shuffle(blacks)
            for w, b in zip(whites, blacks):
                maps[j, w], maps[j, b] = b, w
    family = PairingFamily(n=inp.n, omegas=omegas, maps=maps)
    validate_pairings(inp, family)
    return family


def pairings_from_images(inp: ColoredCycleInput, images: Mapping[int, Sequence[int]]) -> PairingFamily:
    """User-supplied involutions keyed by color bitmask; missing subsets fall back to the canonical choice."""
    canonical = build_pairings(inp)
    maps = canonical.maps.copy()
    for omega, image in images.items():
        if omega not in canonical.position:
            raise InvalidPairing(f"{members(omega)} is not a nonempty proper subset of colors")
        if len(image) != inp.simplex_count:
            raise InvalidPairing(f"pairing for {members(omega)} has {len(image)} entries")
        maps[canonical.position[omega]] = np.asarray(image, dtype=np.int64)
    family = PairingFamily(n=inp.n, omegas=canonical.omegas, maps=maps)
    validate_pairings(inp, family)
    return family


def validate_pairings(inp: ColoredCycleInput, family: PairingFamily) -> None:
    idx = np.arange(inp.simplex_count)
    for j, omega in enumerate(family.omegas):
        lam = family.maps[j]
        if lam.min() < 0 or lam.max() >= inp.simplex_count:
            raise InvalidPairing(f"pairing for {members(omega)} leaves the simplex set", witness=[list(members(omega))])
        swapped = inp.white[lam] != inp.white
        if not swapped.all():
            i = int(np.flatnonzero(~swapped)[0])
            raise InvalidPairing("pairing does not swap white and black", witness=[i, list(members(omega))])
        involutive = lam[lam] == idx
        if not involutive.all():
            i = int(np.flatnonzero(~involutive)[0])
            raise InvalidPairing("pairing is not an involution", witness=[i, list(members(omega))])
        for i in range(inp.simplex_count):
            if inp.type_face(i, omega) != inp.type_face(int(lam[i]), omega):
                raise InvalidPairing("paired simplices do not share their face of this type", witness=[i, list(members(omega))])


# === Machine à états ===

class RealizationState(NamedTuple):
    c: np.ndarray
    a: np.ndarray
    r: int


def initial_state(family: PairingFamily) -> RealizationState:
    count = family.maps.shape[1]
    return RealizationState(
        c=family.maps.astype(family.dtype),
        a=np.arange(count, dtype=family.dtype),
        r=0,
    )


def transition(state: RealizationState, omega: int, family: PairingFamily) -> RealizationState:
    """s -> T_omega s: a' = c(omega) o a, c'(gamma) = c(omega) c(gamma) c(omega) for gamma < omega."""
    return _step(state, family.position[omega], family)


def _step(state: RealizationState, j: int, family: PairingFamily) -> RealizationState:
    cw = state.c[j]
    c = state.c.copy()
    sub = family.below[j]
    if len(sub):
        c[sub] = cw[c[sub][:, cw]]
    return RealizationState(c=c, a=cw[state.a], r=state.r ^ (1 << (size(family.omegas[j]) - 1)))


def encode(state: RealizationState) -> bytes:
    return state.c.tobytes() + state.a.tobytes() + state.r.to_bytes(4, "little")


def decode(key: bytes, family: PairingFamily) -> RealizationState:
    rows, count = family.maps.shape
    if len(key) != (rows + 1) * count * np.dtype(family.dtype).itemsize + 4:
        raise PreconditionFailed(f"state key of length {len(key)} does not match the pairing family")
    flat = np.frombuffer(key[:-4], dtype=family.dtype)
    return RealizationState(
        c=flat[:rows * count].reshape(rows, count).copy(),
        a=flat[rows * count:].copy(),
        r=int.from_bytes(key[-4:], "little"),
    )


def _closure(
    start: bytes,
    neighbours: Callable[[bytes], List[bytes]],
    degree: int,
    budget: int,
) -> Tuple[List[bytes], np.ndarray, bool]:
    """Deterministic BFS; unknown transitions are -1 once the budget is spent."""
    keys = [start]
    index = {start: 0}
    rows: List[Tuple[int, List[int]]] = []
    queue = deque([0])
    complete = True
    while queue:
        i = queue.popleft()
        row = []
        for key in neighbours(keys[i]):
            idx = index.get(key)
            if idx is None:
                if len(keys) >= budget:
                    complete = False
                    row.append(-1)
                    continue
                idx = len(keys)
                keys.append(key)
                index[key] = idx
                queue.append(idx)
            row.append(idx)
        rows.append((i, row))
    transitions = np.full((len(keys), degree), -1, dtype=np.int32)
    for i, row in rows:
        transitions[i] = row
    return keys, transitions, complete


@dataclass(eq=False)
class CoveringAtlas:
    family: PairingFamily
    keys: List[bytes]
    transitions: np.ndarray  # (N, |Omega|), -1 = inconnu
    complete: bool
    budget: int

    @property
    def size(self) -> int:
        return len(self.keys)

    def state(self, i: int) -> RealizationState:
        return decode(self.keys[i], self.family)

    @cached_property
    def images(self) -> np.ndarray:
        """Full a-permutation of every stored state, shape (N, |A|)."""
        return np.array([self.state(i).a for i in range(self.size)], dtype=np.int64).reshape(self.size, -1)

    @cached_property
    def r_values(self) -> np.ndarray:
        return np.array([self.state(i).r for i in range(self.size)], dtype=np.int64)

    def base_images(self, base: int) -> np.ndarray:
        return self.images[:, base]


def enumerate_covering(
    inp: ColoredCycleInput,
    family: PairingFamily,
    budget: int,
    strict: bool = False,
) -> CoveringAtlas:
    if budget < 1:
        raise PreconditionFailed("budget must be at least 1")
    degree = len(family.omegas)

    def neighbours(key: bytes) -> List[bytes]:
        state = decode(key, family)
        return [encode(_step(state, j, family)) for j in range(degree)]

    keys, transitions, complete = _closure(encode(initial_state(family)), neighbours, degree, budget)
    atlas = CoveringAtlas(family=family, keys=keys, transitions=transitions, complete=complete, budget=budget)
    if complete:
        logger.info(f"covering complete: {atlas.size} cells over {inp.simplex_count} simplices")
    else:
        logger.warning(f"budget of {budget} states exhausted, partial atlas")
        if strict:
            raise BudgetExhausted(f"state budget {budget} exhausted", atlas=atlas)
    return atlas


# === Certificat ===

def _type_face_ids(inp: ColoredCycleInput, family: PairingFamily) -> np.ndarray:
    ids = np.zeros((len(family.omegas), inp.simplex_count), dtype=np.int64)
    for j, omega in enumerate(family.omegas):
        faces: Dict[Tuple[int, ...], int] = {}
        for i in range(inp.simplex_count):
            ids[j, i] = faces.setdefault(inp.type_face(i, omega), len(faces))
    return ids


def _first(mask: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(mask)
    return int(hits[0]) if len(hits) else None


def local_checks(atlas: CoveringAtlas, inp: ColoredCycleInput) -> Dict[str, CheckResult]:
    """Invariants checkable on any stored state, complete atlas or not."""
    family = atlas.family
    T = atlas.transitions
    n_states = atlas.size
    p = atlas.base_images(inp.base)
    checks: Dict[str, CheckResult] = {}

    parity = (np.array([bin(r).count("1") for r in atlas.r_values]) % 2 == 0)
    bad = _first(inp.white[p] != parity)
    checks["parity"] = CheckResult(passed=bad is None, witness=bad)

    tf = _type_face_ids(inp, family)
    idx = np.arange(n_states)
    witness = None
    for j in range(len(family.omegas)):
        known = T[:, j] >= 0
        target = np.where(known, T[:, j], 0)
        bad = _first(known & (tf[j][p] != tf[j][p[target]]))
        if bad is not None:
            witness = [bad, list(members(family.omegas[j]))]
            break
    checks["well_defined"] = CheckResult(passed=witness is None, witness=witness)

    witness = None
    for j in range(len(family.omegas)):
        known = T[:, j] >= 0
        target = np.where(known, T[:, j], 0)
        back = T[target, j]
        broken = ((back >= 0) & (back != idx)) | (target == idx)
        bad = _first(known & broken)
        if bad is not None:
            witness = [bad, list(members(family.omegas[j]))]
            break
    checks["involution"] = CheckResult(passed=witness is None, witness=witness)

    witness = None
    for j1, small in enumerate(family.omegas):
        for j2, big in enumerate(family.omegas):
            if small == big or small & big != small:
                continue
            first, second = T[:, j2], T[:, j1]
            known = (first >= 0) & (second >= 0)
            left = np.where(known, T[np.where(known, first, 0), j1], -1)
            right = np.where(known, T[np.where(known, second, 0), j2], -1)
            usable = known & (left >= 0) & (right >= 0)
            bad = _first(usable & (left != right))
            if bad is not None:
                witness = [bad, list(members(small)), list(members(big))]
                break
        if witness is not None:
            break
    checks["commutation"] = CheckResult(passed=witness is None, witness=witness)
    return checks


def verify_certificate(atlas: CoveringAtlas, inp: ColoredCycleInput) -> RealizationCertificate:
    checks = local_checks(atlas, inp)
    n_states, count = atlas.size, inp.simplex_count
    if not atlas.complete:
        return RealizationCertificate(cells=n_states, simplices=count, complete=False, checks=checks)

    p = atlas.base_images(inp.base)
    fibers = np.bincount(p, minlength=count)
    uniform = bool((fibers == fibers[0]).all()) and n_states % count == 0
    checks["fiber_uniformity"] = CheckResult(
        passed=uniform, witness=None if uniform else int(np.argmax(fibers != fibers[0])),
    )

    buckets = np.bincount(atlas.r_values, minlength=1 << inp.n)
    even = bool((buckets == buckets[0]).all())
    checks["projection"] = CheckResult(passed=even, witness=None if even else buckets.tolist())

    return RealizationCertificate(
        cells=n_states,
        simplices=count,
        complete=True,
        k=n_states // count if uniform else None,
        fiber_counts=fibers.tolist(),
        projection_fiber=int(buckets[0]) if even else None,
        checks=checks,
    )


# === Contrôles croisés ===

def compose_letters(word: Sequence[int], family: PairingFamily) -> np.ndarray:
    """Lambda(x_{w1} ... x_{wk}) = lambda_{w1} o ... o lambda_{wk}."""
    result = np.arange(family.maps.shape[1])
    for omega in word:
        result = result[family.of(omega)]
    return result


def state_via_algebra(gword: Sequence[int], family: PairingFamily) -> RealizationState:
    """State of g from the semidirect algebra: c = Lambda o psi_g^-1, a = Lambda(theta(g)), r = rho(g)."""
    poset = omega_poset(family.n)
    g = word_product(gword, poset)
    inverse = invert_aut(g.psi)
    c = np.array([compose_letters(apply_aut(inverse, (gamma,), poset), family) for gamma in family.omegas])
    r = 0
    for omega in gword:
        r ^= 1 << (size(omega) - 1)
    return RealizationState(c=c.astype(family.dtype), a=compose_letters(g.x, family).astype(family.dtype), r=r)


def replay(gword: Sequence[int], family: PairingFamily) -> RealizationState:
    """State of s_{w1} ... s_{wk}: T_{wk} acts first."""
    state = initial_state(family)
    for omega in reversed(gword):
        state = transition(state, omega, family)
    return state


def states_equal(s1: RealizationState, s2: RealizationState) -> bool:
    return s1.r == s2.r and np.array_equal(s1.a, s2.a) and np.array_equal(s1.c, s2.c)


def circle_winding(atlas: CoveringAtlas, inp: ColoredCycleInput) -> int:
    """Winding number of the cover circle around Z when n = 1."""
    if inp.n != 1 or not atlas.complete:
        raise PreconditionFailed("winding oracle needs a complete atlas of a 1-dimensional cycle")
    family = atlas.family
    j_in, j_out = family.position[0b01], family.position[0b10]
    net = np.zeros(inp.simplex_count, dtype=np.int64)
    p = atlas.base_images(inp.base)
    state, steps = 0, 0
    while True:
        simplex = inp.z.complex.top_simplices[int(p[state])]
        start = inp.type_face(int(p[state]), family.omegas[j_in])[0]
        end = inp.type_face(int(p[state]), family.omegas[j_out])[0]
        step_sign = 1 if (start, end) == simplex else -1
        net[p[state]] += step_sign * inp.z.sign(int(p[state]))
        state = int(atlas.transitions[state, j_out])
        j_in, j_out = j_out, j_in
        steps += 1
        if state == 0 and j_out == family.position[0b10]:
            break
        if steps > 2 * atlas.size:
            raise PreconditionFailed("traversal did not close up")
    if steps != atlas.size:
        raise PreconditionFailed(f"traversal visited {steps} of {atlas.size} cells")
    if len(set(net.tolist())) != 1:
        raise InconsistentDegree("edges of Z are covered a different number of times", witness=net.tolist())
    return int(net[0])


def reduced_closure(family: PairingFamily, base: int, budget: int) -> Tuple[List[bytes], np.ndarray]:
    """BFS over (c, a(sigma_0)); its stabilizer at the start is a finite-index subgroup W_H."""
    degree = len(family.omegas)
    rows = family.maps.shape[0]

    def split(key: bytes):
        flat = np.frombuffer(key, dtype=family.dtype)
        return flat[:-1].reshape(rows, -1), int(flat[-1])

    def neighbours(key: bytes) -> List[bytes]:
        c, point = split(key)
        out = []
        for j in range(degree):
            state = _step(RealizationState(c=c, a=np.array([point], dtype=family.dtype), r=0), j, family)
            out.append(state.c.tobytes() + state.a.tobytes())
        return out

    start = family.maps.astype(family.dtype).tobytes() + np.array([base], dtype=family.dtype).tobytes()
    keys, transitions, _ = _closure(start, neighbours, degree, budget)
    return keys, transitions


def stabilizer_sampler(transitions: np.ndarray, omegas: List[int], walk: int = 8) -> Callable[[random.Random], Tuple[int, ...]]:
    """Closed walks at the start state, spelled as words in the s generators."""
    parent: Dict[int, Tuple[int, int]] = {0: (-1, -1)}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j, t in enumerate(transitions[i]):
            if t >= 0 and int(t) not in parent:
                parent[int(t)] = (i, j)
                queue.append(int(t))

    def sample(rng: random.Random) -> Tuple[int, ...]:
        state, steps = 0, []
        for _ in range(rng.randint(0, walk)):
            options = [j for j, t in enumerate(transitions[state]) if t >= 0]
            j = rng.choice(options)
            steps.append(j)
            state = int(transitions[state, j])
        while state != 0:
            # retour par l'arbre : T_j est une involution
            previous, j = parent[state]
            steps.append(j)
            state = previous
        # la marche T_{j1}, ..., T_{jk} est le mot s_{jk} ... s_{j1}
        return tuple(omegas[j] for j in reversed(steps))

    return sample


def algebra_crosscheck(
    inp: ColoredCycleInput,
    family: PairingFamily,
    trials: int = 100,
    max_len: int = 8,
    seed: int = 0,
    budget: int = 20000,
) -> AlgebraReport:
    """Compare the state machine with the semidirect algebra and check that theta descends."""
    poset = omega_poset(inp.n)
    _, transitions = reduced_closure(family, inp.base, budget)
    action = FiniteQuotientAction(
        letter_images={omega: tuple(int(x) for x in family.of(omega)) for omega in family.omegas},
        base_point=inp.base,
        stabilizer_sampler=stabilizer_sampler(transitions, family.omegas),
    )
    report = verify_section4(poset, trials=trials, max_len=max_len, seed=seed, action=action)

    rng = random.Random(seed)
    replays = 0
    for _ in range(trials):
        word = tuple(rng.choice(family.omegas) for _ in range(rng.randint(0, max_len)))
        replays += 1
        if not states_equal(replay(word, family), state_via_algebra(word, family)):
            report.counterexamples.append(Counterexample(
                check="state_replay",
                detail="machine state differs from the algebraic state",
                words=[[poset.position[w] for w in word]],
            ))
    report.checks["state_replay"] = replays
    return report
