"""Word-level algebra of right-angled Coxeter groups built from a finite poset.

F is the free product of copies of Z/2 generated by x_w (w in the poset), psi_w
is the automorphism x_g -> x_w x_g x_w for g < w (identity on the other letters),
and W is generated inside the semidirect product by s_w = x_w psi_w. Elements
are stored as (psi word, reduced x word); psi words are compared through their
action on the generators.
"""
import logging
import random
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
from sympy.combinatorics.free_groups import free_group

import settings
from errors import InvalidPoset
from schemas import AlgebraReport, Counterexample

logger = logging.getLogger(__name__)

Letter = Hashable
InvolutionWord = Tuple[Letter, ...]
AutWord = Tuple[Letter, ...]


@dataclass(frozen=True)
class Poset:
    elements: Tuple[Letter, ...]
    strict_less: FrozenSet[Tuple[Letter, Letter]]

    @classmethod
    def from_relations(cls, elements: Iterable[Letter], less: Iterable[Tuple[Letter, Letter]]) -> "Poset":
        elements = tuple(elements)
        less = [tuple(pair) for pair in less]
        graph = nx.DiGraph()
        graph.add_nodes_from(elements)
        graph.add_edges_from(less)
        if graph.number_of_nodes() != len(elements):
            raise InvalidPoset("relation mentions an unknown element")
        if any(a == b for a, b in less) or not nx.is_directed_acyclic_graph(graph):
            raise InvalidPoset("relation is not a strict order", witness=[list(p) for p in less])
        closure = nx.transitive_closure_dag(graph)
        return cls(elements=elements, strict_less=frozenset(closure.edges()))

    def lt(self, a: Letter, b: Letter) -> bool:
        return (a, b) in self.strict_less

    def comparable(self, a: Letter, b: Letter) -> bool:
        return a == b or (a, b) in self.strict_less or (b, a) in self.strict_less

    @cached_property
    def above(self) -> Dict[Letter, FrozenSet[Letter]]:
        above = {e: set() for e in self.elements}
        for a, b in self.strict_less:
            above[a].add(b)
        return {e: frozenset(s) for e, s in above.items()}

    @cached_property
    def position(self) -> Dict[Letter, int]:
        return {e: i for i, e in enumerate(self.elements)}

    @cached_property
    def comparable_pairs(self) -> List[Tuple[Letter, Letter]]:
        return sorted(self.strict_less, key=lambda p: (self.position[p[0]], self.position[p[1]]))

    @cached_property
    def incomparable_pairs(self) -> List[Tuple[Letter, Letter]]:
        return [
            (a, b)
            for i, a in enumerate(self.elements)
            for b in self.elements[i + 1:]
            if not self.comparable(a, b)
        ]


def random_poset(size: int, rng: random.Random, density: float = 0.3) -> Poset:
    """Random order on 0..size-1 compatible with the natural order."""
    less = [(i, j) for i in range(size) for j in range(i + 1, size) if rng.random() < density]
    return Poset.from_relations(range(size), less)


# === Mots dans F ===

def reduce(word: Iterable[Letter]) -> InvolutionWord:
    """Cancel equal adjacent letters (x_w^2 = 1) in one stack pass."""
    stack: List[Letter] = []
    for letter in word:
        if stack and stack[-1] == letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def invert(word: Sequence[Letter]) -> InvolutionWord:
    return tuple(reversed(word))


def apply_psi(omega: Letter, word: Iterable[Letter], poset: Poset) -> InvolutionWord:
    out: List[Letter] = []
    for letter in word:
        if poset.lt(letter, omega):
            out.extend((omega, letter, omega))
        else:
            out.append(letter)
    return reduce(out)


def apply_aut(psi: AutWord, word: Iterable[Letter], poset: Poset) -> InvolutionWord:
    """psi = psi_{a1} ... psi_{ak} acts by applying psi_{ak} first."""
    word = tuple(word)
    for omega in reversed(psi):
        word = apply_psi(omega, word, poset)
    return word


def invert_aut(psi: AutWord) -> AutWord:
    # chaque psi_w est une involution
    return tuple(reversed(psi))


def aut_equal(p: AutWord, q: AutWord, poset: Poset) -> bool:
    return all(apply_aut(p, (g,), poset) == apply_aut(q, (g,), poset) for g in poset.elements)


def is_letter_conjugate(word: InvolutionWord, omega: Letter, poset: Poset) -> bool:
    """True when the reduced word reads y x_w y^-1 with every letter of y above w."""
    if len(word) % 2 == 0:
        return False
    k = len(word) // 2
    y = word[:k]
    return word[k] == omega and word[k + 1:] == invert(y) and set(y) <= poset.above[omega]


# === Produit semi-direct ===

class SemiDirectElement(NamedTuple):
    psi: AutWord
    x: InvolutionWord


def identity() -> SemiDirectElement:
    return SemiDirectElement(psi=(), x=())


def s(omega: Letter) -> SemiDirectElement:
    # x_w psi_w = psi_w x_w puisque psi_w fixe x_w
    return SemiDirectElement(psi=(omega,), x=(omega,))


def multiply(g: SemiDirectElement, h: SemiDirectElement, poset: Poset) -> SemiDirectElement:
    """(psi1 x1)(psi2 x2) = (psi1 psi2)(psi2^-1(x1) x2)."""
    x = reduce(apply_aut(invert_aut(h.psi), g.x, poset) + h.x)
    return SemiDirectElement(psi=reduce(g.psi + h.psi), x=x)


def element_equal(g: SemiDirectElement, h: SemiDirectElement, poset: Poset) -> bool:
    return g.x == h.x and aut_equal(g.psi, h.psi, poset)


def word_product(gword: Iterable[Letter], poset: Poset) -> SemiDirectElement:
    result = identity()
    for omega in gword:
        # droite par s_w : psi_w^-1(x) x_w
        result = SemiDirectElement(
            psi=reduce(result.psi + (omega,)),
            x=reduce(apply_psi(omega, result.x, poset) + (omega,)),
        )
    return result


def theta(gword: Iterable[Letter], poset: Poset) -> InvolutionWord:
    return word_product(gword, poset).x


# === Forme normale dans le groupe de Coxeter à angles droits ===

def racg_normal_form(gword: Iterable[Letter], poset: Poset) -> Tuple[Letter, ...]:
    """Canonical word by piling: generators commute exactly when comparable."""
    elements = poset.elements
    blocking = {
        e: [f for f in elements if f == e or not poset.comparable(e, f)]
        for e in elements
    }
    piles: Dict[Letter, deque] = {e: deque() for e in elements}
    count = 0
    for letter in gword:
        if piles[letter] and piles[letter][-1]:
            # s_w s_w = 1
            count -= 1
            for other in blocking[letter]:
                piles[other].pop()
        else:
            count += 1
            for other in blocking[letter]:
                piles[other].append(other == letter)

    out: List[Letter] = []
    while count:
        letter = next(e for e in elements if piles[e] and piles[e][0])
        out.append(letter)
        count -= 1
        for other in blocking[letter]:
            piles[other].popleft()
    return tuple(out)


def racg_equal(w1: Iterable[Letter], w2: Iterable[Letter], poset: Poset) -> bool:
    return racg_normal_form(w1, poset) == racg_normal_form(w2, poset)


# === Vérifications ===

@dataclass(frozen=True)
class FiniteQuotientAction:
    """Action of F on a finite set through letter permutations, with a sampler of W_H words."""
    letter_images: Dict[Letter, Tuple[int, ...]]
    base_point: int
    stabilizer_sampler: Callable[[random.Random], Tuple[Letter, ...]]

    def point(self, word: Sequence[Letter]) -> int:
        p = self.base_point
        for letter in reversed(word):
            p = self.letter_images[letter][p]
        return p


def _random_word(letters: Sequence[Letter], rng: random.Random, max_len: int) -> Tuple[Letter, ...]:
    return tuple(rng.choice(letters) for _ in range(rng.randint(0, max_len)))


def _scramble(word: Tuple[Letter, ...], poset: Poset, rng: random.Random, moves: int) -> Tuple[Letter, ...]:
    """Apply random Coxeter moves (insert s s, swap commuting neighbours)."""
    out = list(word)
    for _ in range(moves):
        if len(out) < 2 or rng.random() < 0.3:
            pos = rng.randint(0, len(out))
            letter = rng.choice(poset.elements)
            out[pos:pos] = [letter, letter]
        else:
            pos = rng.randrange(len(out) - 1)
            if poset.comparable(out[pos], out[pos + 1]):
                out[pos], out[pos + 1] = out[pos + 1], out[pos]
    return tuple(out)


def _semidirect_trial(
    poset: Poset,
    rng: random.Random,
    max_len: int,
    action: Optional[FiniteQuotientAction],
) -> Tuple[Dict[str, int], List[Counterexample]]:
    letters = poset.elements
    counts: Dict[str, int] = {}
    found: List[Counterexample] = []
    spell = lambda w: [poset.position[e] for e in w]

    def record(check: str, ok: bool, detail: str, *words):
        counts[check] = counts.get(check, 0) + 1
        if not ok:
            found.append(Counterexample(check=check, detail=detail, words=[spell(w) for w in words]))

    omega = rng.choice(letters)
    psi = _random_word(letters, rng, max_len)
    image = apply_aut(psi, (omega,), poset)
    record("psi_invariance", is_letter_conjugate(image, omega, poset), "psi(x_w) is not y x_w y^-1 with y above w", psi, (omega,))

    g = _random_word(letters, rng, max_len)
    theta_g = theta(g, poset)
    quotient = reduce(theta((omega,) + g, poset) + invert(theta_g))
    record("cocycle", is_letter_conjugate(quotient, omega, poset), "theta(s_w g) theta(g)^-1 is not y x_w y^-1", g, (omega,))
    record("parity", len(theta_g) % 2 == len(g) % 2, "x-part parity differs from word length", g)

    if poset.comparable_pairs:
        a, b = rng.choice(poset.comparable_pairs)
        commute = element_equal(word_product((a, b), poset), word_product((b, a), poset), poset)
        record("commutation", commute, "comparable generators do not commute", (a, b))

    if rng.random() < 0.5:
        other = _scramble(g, poset, rng, moves=rng.randint(1, 6))
    else:
        other = _random_word(letters, rng, max_len)
    by_rewriting = racg_equal(g, other, poset)
    by_algebra = element_equal(word_product(g, poset), word_product(other, poset), poset)
    record("faithfulness", by_rewriting == by_algebra, "normal-form equality disagrees with semidirect equality", g, other)

    if action is not None:
        g1 = _random_word(letters, rng, max_len)
        h = action.stabilizer_sampler(rng)
        same = action.point(theta(g1 + h, poset)) == action.point(theta(g1, poset))
        record("descent", same, "theta(g h) sigma_0 differs from theta(g) sigma_0 for h in W_H", g1, h)
    return counts, found


def verify_section4(
    poset: Poset,
    trials: int = 200,
    max_len: int = 12,
    seed: int = 0,
    action: Optional[FiniteQuotientAction] = None,
) -> AlgebraReport:
    """Random checks of psi-invariance, the theta cocycle, commutation, faithfulness and descent."""
    if not poset.elements:
        return AlgebraReport(trials=0)

    def run(t: int):
        return _semidirect_trial(poset, random.Random(seed * 1_000_003 + t), max_len, action)

    with ThreadPoolExecutor(max_workers=settings.THREADS) as pool:
        results = list(pool.map(run, range(trials)))

    counts: Dict[str, int] = {}
    counterexamples: List[Counterexample] = []
    for trial_counts, found in results:
        for check, k in trial_counts.items():
            counts[check] = counts.get(check, 0) + k
        counterexamples.extend(found)
    if counterexamples:
        logger.warning(f"algebra checks: {len(counterexamples)} counterexamples over {trials} trials")
    else:
        logger.info(f"algebra checks: {sum(counts.values())} checks passed over {trials} trials")
    return AlgebraReport(trials=trials, checks=counts, counterexamples=counterexamples)


# === Variante libre (groupe d'Artin) ===

class _FreeVariant:
    """Letters with inverses; psi_w(x_g) = x_w x_g x_w^-1 for g < w."""

    def __init__(self, poset: Poset):
        self.poset = poset
        names = ", ".join(f"x{i}" for i in range(len(poset.elements)))
        self.group, *gens = free_group(names)
        self.gen = dict(zip(poset.elements, gens))
        self.letter_of = dict(zip(self.group.symbols, poset.elements))

    def psi(self, omega, sign, elem):
        result = self.group.identity
        for symbol, power in elem.array_form:
            letter = self.letter_of[symbol]
            gen = self.gen[letter]
            if self.poset.lt(letter, omega):
                conj = self.gen[omega] ** sign
                gen = conj * gen * conj ** -1
            result = result * gen ** power
        return result

    def apply(self, psi, elem):
        for omega, sign in reversed(psi):
            elem = self.psi(omega, sign, elem)
        return elem

    def multiply(self, g, h):
        inverse = tuple((omega, -sign) for omega, sign in reversed(h[0]))
        return (g[0] + h[0], self.apply(inverse, g[1]) * h[1])

    def equal(self, g, h):
        if g[1] != h[1]:
            return False
        return all(self.apply(g[0], self.gen[e]) == self.apply(h[0], self.gen[e]) for e in self.poset.elements)

    def y(self, omega):
        # y_w = x_w^-1 psi_w = psi_w x_w^-1
        return (((omega, 1),), self.gen[omega] ** -1)

    def identity(self):
        return ((), self.group.identity)


def verify_artin(poset: Poset, trials: int = 50, seed: int = 0) -> AlgebraReport:
    if not poset.elements:
        return AlgebraReport(trials=0)
    rng = random.Random(seed)
    free = _FreeVariant(poset)
    counts: Dict[str, int] = {}
    found: List[Counterexample] = []
    spell = lambda *letters: [poset.position[e] for e in letters]

    def sample(pairs):
        return pairs if len(pairs) <= trials else rng.sample(pairs, trials)

    for a, b in sample(poset.comparable_pairs):
        counts["artin_commutation"] = counts.get("artin_commutation", 0) + 1
        ya, yb = free.y(a), free.y(b)
        if not free.equal(free.multiply(ya, yb), free.multiply(yb, ya)):
            found.append(Counterexample(check="artin_commutation", detail="y_a y_b != y_b y_a for comparable a, b", words=[spell(a, b)]))

    for a, b in sample(poset.incomparable_pairs):
        counts["artin_noncommutation"] = counts.get("artin_noncommutation", 0) + 1
        ya, yb = free.y(a), free.y(b)
        if free.equal(free.multiply(ya, yb), free.multiply(yb, ya)):
            found.append(Counterexample(check="artin_noncommutation", detail="y_a y_b = y_b y_a for incomparable a, b", words=[spell(a, b)]))

    for omega in sample(list(poset.elements)):
        counts["infinite_order"] = counts.get("infinite_order", 0) + 1
        power = free.identity()
        for k in range(1, 9):
            power = free.multiply(power, free.y(omega))
            if free.equal(power, free.identity()):
                found.append(Counterexample(check="infinite_order", detail=f"y_w has order {k}", words=[spell(omega)]))
                break

    logger.info(f"artin checks: {sum(counts.values())} checks, {len(found)} counterexamples")
    return AlgebraReport(trials=trials, checks=counts, counterexamples=found)
