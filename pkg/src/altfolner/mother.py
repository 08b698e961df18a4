"""The alternate mother group G_d = <A, B> and the auxiliary constructions.

``A`` is the rooted copy of A_d and ``B`` the finite group of directed
elements ``b(a_2, ..., a_d; rho)`` whose wreath decomposition is
``(b, a_2, ..., a_d) rho`` with ``rho(1) = 1``.
"""
from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import ResourceLimitError, UnsupportedDegreeError
from .perm import (
    Permutation,
    alternating_group,
    double_perm,
    identity,
    orbit,
    random_alternating,
    random_permutation,
)
from .words import (
    DEFAULT_MAX_DEGREE,
    DirectedSpec,
    GroupWord,
    LevelData,
    Portrait,
    ValencySequence,
    commutator,
    level_permutation,
    portrait,
)

__all__ = [
    "BElement",
    "b_product",
    "make_generator",
    "rooted",
    "directed",
    "commutator_expression",
    "perfect1_witness",
    "commutator_witness",
    "slot_word",
    "double_embed",
    "double_word",
    "double_spec",
    "random_directed",
    "embedding_check",
    "SaturationData",
    "saturated_closure",
    "mother_generators",
    "stabilizer_quotient_generators",
    "find_tau",
    "level_orbit",
]


class BElement:
    """``b(a_2, ..., a_d; rho)``, identified with ``(a_2, ..., a_d) rho``."""

    __slots__ = ("a", "rho", "_hash")

    def __init__(self, a: Sequence[Permutation], rho: Permutation, *, check: bool = True):
        a = tuple(a)
        if check:
            d = rho.d
            if len(a) != d - 1 or any(x.d != d for x in a):
                raise ValueError(f"need {d - 1} labels of degree {d}")
            if rho(1) != 1:
                raise ValueError(f"rho must fix 1, got {rho}")
            if not rho.is_even() or not all(x.is_even() for x in a):
                raise ValueError("B elements use even permutations only")
        self.a = a
        self.rho = rho
        self._hash = hash((a, rho))

    @classmethod
    def identity(cls, d: int) -> BElement:
        e = identity(d)
        return cls((e,) * (d - 1), e, check=False)

    @classmethod
    def random(cls, d: int, rng: random.Random) -> BElement:
        return cls([random_alternating(d, rng=rng) for _ in range(d - 1)],
                   random_alternating(d, fix_one=True, rng=rng), check=False)

    @classmethod
    def slot(cls, alpha: Permutation, t: int = 2) -> BElement:
        """``alpha`` at coordinate ``t`` and identity elsewhere, trivial rho."""
        d = alpha.d
        e = identity(d)
        a = [e] * (d - 1)
        a[t - 2] = alpha
        return cls(a, e)

    @classmethod
    def empty(cls, rho: Permutation) -> BElement:
        """``b(e, ..., e; rho)``."""
        e = identity(rho.d)
        return cls((e,) * (rho.d - 1), rho)

    @classmethod
    def from_spec(cls, spec: DirectedSpec) -> BElement:
        if spec.prefix or len(spec.period) != 1:
            raise ValueError("only constant directed data defines an element of B")
        lv = spec.period[0]
        return cls(lv.a, lv.rho)

    @property
    def d(self) -> int:
        return self.rho.d

    def __mul__(self, other: BElement) -> BElement:
        return b_product(self, other)

    def inverse(self) -> BElement:
        rinv = self.rho.inverse()
        a = tuple(self.a[rinv(s) - 2].inverse() for s in range(2, self.d + 1))
        return BElement(a, rinv, check=False)

    def is_identity(self) -> bool:
        return self.rho.is_identity() and all(x.is_identity() for x in self.a)

    def to_spec(self) -> DirectedSpec:
        return DirectedSpec.constant(self.a, self.rho)

    def to_word(self) -> GroupWord:
        return GroupWord.of(self.to_spec())

    def __eq__(self, other) -> bool:
        return isinstance(other, BElement) and self.a == other.a and self.rho == other.rho

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"b({', '.join(map(str, self.a))}; {self.rho})"


def b_product(x: BElement, y: BElement) -> BElement:
    """Group law of (A_d x ... x A_d) semidirect A_{2..d}: ``x`` acts first."""
    if x.d != y.d:
        raise ValueError("degree mismatch")
    rho = x.rho
    a = tuple(x.a[t - 2] * y.a[rho(t) - 2] for t in range(2, x.d + 1))
    return BElement(a, rho * y.rho, check=False)


def rooted(sigma: Permutation) -> GroupWord:
    return GroupWord.of(sigma, valency=ValencySequence.constant(sigma.d))


def directed(b: BElement) -> GroupWord:
    return b.to_word()


def make_generator(kind: str, payload, *, valency: ValencySequence | None = None,
                   alternate: bool = True) -> GroupWord:
    """One-letter word for a rooted (``Permutation``) or directed (``BElement`` or
    ``DirectedSpec``) generator.  With ``alternate`` all payload labels must be even."""
    if kind == "rooted":
        if not isinstance(payload, Permutation):
            raise ValueError("rooted generators take a Permutation")
        if alternate and not payload.is_even():
            raise ValueError(f"rooted payload {payload} is odd")
        return GroupWord.of(payload, valency=valency or ValencySequence.constant(payload.d))
    if kind == "directed":
        if isinstance(payload, BElement):
            payload = payload.to_spec()
        if not isinstance(payload, DirectedSpec):
            raise ValueError("directed generators take a BElement or DirectedSpec")
        if alternate and not payload.is_alternate():
            raise ValueError("directed payload has odd labels")
        return GroupWord.of(payload, valency=valency)
    raise ValueError(f"unknown generator kind {kind!r}")


# --- surjectivity witnesses -------------------------------------------------

def _three_cycle_decomposition(p: Permutation) -> list[Permutation]:
    """Even ``p`` as a product (left to right) of 3-cycles."""
    d = p.d
    transpositions = []
    for cyc in p.cycles():
        c1 = cyc[0]
        transpositions.extend((c1, c) for c in cyc[1:])
    if len(transpositions) % 2:
        raise ValueError(f"{p} is odd")

    def tr(a, b):
        return Permutation.from_cycles(f"({a} {b})", d)

    out = []
    for (a, b), (c, e) in zip(transpositions[::2], transpositions[1::2]):
        if {a, b} & {c, e}:
            out.append(tr(a, b) * tr(c, e))
        else:
            out.append(tr(a, b) * tr(b, c))
            out.append(tr(b, c) * tr(c, e))
    return [x for x in out if not x.is_identity()]


def _perm_commutator(u: Permutation, v: Permutation) -> Permutation:
    return u * v * u.inverse() * v.inverse()


@functools.lru_cache(maxsize=None)
def _base_three_cycle_commutator() -> tuple[Permutation, Permutation]:
    target = Permutation.from_cycles("(1 2 3)", 5)
    a5 = alternating_group(5)
    for u in a5:
        for v in a5:
            if _perm_commutator(u, v) == target:
                return u, v
    raise AssertionError("A_5 is perfect; a commutator must exist")


def _relabel(p: Permutation, points: Sequence[int], d: int) -> Permutation:
    """Transport ``p`` on {1..len(points)} to act on ``points`` inside {1..d}."""
    images = list(range(1, d + 1))
    for i, x in enumerate(points, 1):
        images[x - 1] = points[p(i) - 1]
    return Permutation._trusted(tuple(images))


def commutator_expression(p: Permutation, d: int | None = None) -> list[tuple[Permutation, Permutation]]:
    """Pairs ``(u, v)`` of even permutations with ``p = prod [u, v]``, ``[u, v] = u v u^-1 v^-1``."""
    d = p.d if d is None else d
    if d < 5:
        raise UnsupportedDegreeError(f"A_{d} is not perfect")
    if p.d != d:
        raise ValueError("degree mismatch")
    if not p.is_even():
        raise ValueError(f"{p} is odd")
    u0, v0 = _base_three_cycle_commutator()
    pairs = []
    for c in _three_cycle_decomposition(p):
        (x, y, z), = c.cycles()
        extra = [t for t in range(1, d + 1) if t not in (x, y, z)][:2]
        pts = (x, y, z, *extra)
        pairs.append((_relabel(u0, pts, d), _relabel(v0, pts, d)))
    return pairs


def _tau_spine(d: int) -> Permutation:
    # tau(1) = 1 and tau^-1(2) = 3
    return Permutation.from_cycles("(2 4 3)", d)


def _tau_to_slot(t: int, d: int) -> Permutation:
    """Even permutation sending ``t`` to 1."""
    if t == 1:
        return identity(d)
    s = next(x for x in range(2, d + 1) if x != t)
    return Permutation.from_cycles(f"({t} 1 {s})", d)


def _spine_shift(t: int, d: int) -> Permutation:
    """Even permutation fixing 1 and sending 2 to ``t``."""
    if t == 2:
        return identity(d)
    s = next(x for x in range(3, d + 1) if x != t)
    return Permutation.from_cycles(f"(2 {t} {s})", d)


def commutator_witness(b: BElement, b2: BElement) -> GroupWord:
    """``[b, b2^tau]``: sections ``([b, b2], e, ..., e)`` for b, b2 with data in slot 2 only."""
    tau = rooted(_tau_spine(b.d))
    return commutator(b.to_word(), b2.to_word().conj(tau))


@functools.lru_cache(maxsize=None)
def _witness_slot2(alpha: Permutation) -> GroupWord:
    d = alpha.d
    w = GroupWord.identity(d)
    for u, v in commutator_expression(alpha, d):
        w = w * commutator_witness(BElement.slot(u), BElement.slot(v))
    return w


def _witness_empty(rho: Permutation) -> GroupWord:
    return BElement.empty(rho).to_word() * rooted(rho.inverse())


@functools.lru_cache(maxsize=None)
def _witness_b(b: BElement) -> GroupWord:
    d = b.d
    w = GroupWord.identity(d)
    for t in range(2, d + 1):
        alpha = b.a[t - 2]
        if alpha.is_identity():
            continue
        core = _witness_slot2(alpha)
        if t != 2:
            y = _witness_empty(_spine_shift(t, d))
            core = y.inverse() * core * y
        w = w * core
    if not b.rho.is_identity():
        w = w * _witness_empty(b.rho)
    return w


@functools.lru_cache(maxsize=None)
def _witness_rooted(x: Permutation) -> GroupWord:
    b2 = BElement.slot(x)
    lifted = _witness_b(b2).inverse() * b2.to_word()  # sections (e, x, e, ...)
    return lifted.conj(rooted(Permutation.from_cycles("(1 2 3)", x.d)))


def perfect1_witness(target: Union[BElement, Permutation], d: int | None = None) -> GroupWord:
    """Word over A and B whose decomposition is ``(target, e, ..., e)`` with trivial root."""
    d = target.d if d is None else d
    if d < 5:
        raise UnsupportedDegreeError(f"A_{d} is not perfect")
    if target.d != d:
        raise ValueError("degree mismatch")
    if isinstance(target, Permutation):
        if not target.is_even():
            raise ValueError(f"{target} is odd")
        return _witness_rooted(target)
    if isinstance(target, BElement):
        return _witness_b(target)
    raise TypeError(f"cannot witness {type(target).__name__}")


def slot_word(w: GroupWord, t: int = 1) -> GroupWord:
    """Word with decomposition ``(e, ..., w, ..., e)`` (``w`` at slot ``t``), trivial root.

    ``w`` must be a word over the generators of G_d, d >= 5.
    """
    d = w.valency.d(0)
    out = GroupWord.identity(d)
    for sym, e in w.letters:
        if isinstance(sym, Permutation):
            piece = perfect1_witness(sym, d)
        else:
            piece = perfect1_witness(BElement.from_spec(sym), d)
        out = out * (piece if e == 1 else piece.inverse())
    if t != 1:
        out = out.conj(rooted(_tau_to_slot(t, d)))
    return out


# --- doubling embedding -----------------------------------------------------

def _double_level(lv: LevelData) -> LevelData:
    nd = lv.next_d
    a = [double_perm(x) for x in lv.a] + [identity(2 * nd)] * lv.d
    return LevelData(a, double_perm(lv.rho))


def double_spec(spec: DirectedSpec) -> DirectedSpec:
    return DirectedSpec([_double_level(x) for x in spec.prefix],
                        [_double_level(x) for x in spec.period])


def double_word(w: GroupWord) -> GroupWord:
    """Letterwise image of ``w`` on the tree of doubled valencies."""
    letters = []
    for sym, e in w.letters:
        img = double_perm(sym) if isinstance(sym, Permutation) else double_spec(sym)
        letters.append((img, e))
    return GroupWord(letters, w.valency.doubled())


def double_embed(w: GroupWord, depth: int) -> Portrait:
    """Portrait of the image of ``w``: doubled labels on the copy of the original
    tree (coordinates t <= d_k), identity on every other vertex."""
    src = portrait(w, depth)
    labels = {}
    val2 = w.valency.doubled()
    frontier = [()]
    for k in range(depth):
        nxt = []
        for v in frontier:
            if all(t <= w.valency.d(i) for i, t in enumerate(v)):
                labels[v] = double_perm(src.label(v))
            else:
                labels[v] = identity(val2.d(k))
            nxt.extend(v + (t,) for t in range(1, val2.d(k) + 1))
        frontier = nxt
    return Portrait(val2, depth, labels)


def random_directed(d: int, rng: random.Random, max_prefix: int = 2, max_period: int = 2) -> DirectedSpec:
    """Directed element over the constant tree of valency d with random S_d level data."""
    def level():
        a = [random_permutation(d, rng) for _ in range(d - 1)]
        rho = Permutation._trusted((1,) + tuple(x + 1 for x in random_permutation(d - 1, rng).images))
        return LevelData(a, rho)
    return DirectedSpec([level() for _ in range(rng.randint(0, max_prefix))],
                        [level() for _ in range(rng.randint(1, max_period))])


def embedding_check(n: int, seed: int, d: int = 3, depth: int = 3) -> dict:
    """Images of random directed pairs (x, y) under doubling: alternate, directed,
    equal to the letterwise image, and multiplicative on levels 1..depth."""
    rng = random.Random(f"altfolner:embed:{seed}")
    counts = {"alternate": 0, "directed": 0, "letterwise": 0, "homomorphism": 0}
    witnesses = []
    for trial in range(n):
        x = GroupWord.of(random_directed(d, rng))
        y = GroupWord.of(random_directed(d, rng))
        px, py, pxy = (double_embed(w, depth) for w in (x, y, x * y))
        bad = []
        if not px.is_alternate():
            bad.append("alternate")
        if not px.is_directed():
            bad.append("directed")
        if portrait(double_word(x), depth) != px:
            bad.append("letterwise")
        if any(pxy.level_permutation(j) != px.level_permutation(j) * py.level_permutation(j)
               for j in range(1, depth + 1)):
            bad.append("homomorphism")
        for name in bad:
            counts[name] += 1
        if bad and len(witnesses) < 3:
            witnesses.append({"trial": trial, "violated": bad, "x": repr(x), "y": repr(y)})
    return {"n": n, "d": d, "depth": depth, "violations": counts, "witnesses": witnesses}


# --- saturation ---------------------------------------------------------------

def _at_order(d: int, nd: int) -> int:
    a = lambda n: math.factorial(n) // 2 if n >= 2 else 1
    return a(nd) ** (d - 1) * a(d - 1)


@dataclass
class SaturationData:
    """Distinct (AT type, marked generator data) pairs and the level -> pair map."""

    valency: ValencySequence
    pairs: list                     # [((d_i, d_{i+1}), (h_i for h in gens)), ...]
    level_prefix: tuple[int, ...]
    level_period: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.pairs)

    def s(self, i: int) -> int:
        if i < len(self.level_prefix):
            return self.level_prefix[i]
        return self.level_period[(i - len(self.level_prefix)) % len(self.level_period)]

    def at_types(self) -> list[tuple[int, int]]:
        return [p[0] for p in self.pairs]

    def order(self) -> int:
        """Order of the saturated closure, the full product of the AT(s)."""
        return math.prod(_at_order(d, nd) for d, nd in self.at_types())

    def generators(self) -> list[DirectedSpec]:
        """Directed elements generating the product of AT(s) over s in J: for each
        s, slot-2 and rho-only data on the levels of type s, identity elsewhere."""
        n_pre, n_per = len(self.level_prefix), len(self.level_period)
        n = n_pre + n_per
        out = []
        for s, ((d, nd), _) in enumerate(self.pairs):
            gens_a = _small_alternating_generators(nd)
            gens_rho = [_lift_fix_one(x, d) for x in _small_alternating_generators(d - 1)] if d >= 4 else []
            for kind, items in (("slot", gens_a), ("rho", gens_rho)):
                for x in items:
                    levels = []
                    for i in range(n):
                        di, ndi = self.valency.d(i), self.valency.d(i + 1)
                        e_next = identity(ndi)
                        if self.s(i) == s:
                            if kind == "slot":
                                a = [x] + [e_next] * (di - 2)
                                levels.append(LevelData(a, identity(di)))
                            else:
                                levels.append(LevelData([e_next] * (di - 1), x))
                        else:
                            levels.append(LevelData([e_next] * (di - 1), identity(di)))
                    out.append(DirectedSpec(levels[:n_pre], levels[n_pre:]))
        return out


def _small_alternating_generators(n: int) -> list[Permutation]:
    if n < 3:
        return []
    return [Permutation.from_cycles(f"(1 2 {k})", n) for k in range(3, n + 1)]


def _lift_fix_one(p: Permutation, d: int) -> Permutation:
    """Move a permutation of {1..d-1} onto {2..d}."""
    return Permutation._trusted((1,) + tuple(x + 1 for x in p.images))


def saturated_closure(gens: Iterable[DirectedSpec]) -> SaturationData:
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one directed generator")
    val = gens[0].valency
    if any(g.valency != val for g in gens):
        raise ValueError("generators live on different trees")
    if not val.is_periodic:
        raise ValueError("saturation needs an eventually periodic (bounded) valency description")
    n_pre = max(len(g.prefix) for g in gens)
    n_per = math.lcm(*(len(g.period) for g in gens))
    pairs: list = []
    index: dict = {}
    level_map = []
    for i in range(n_pre + n_per):
        key = ((val.d(i), val.d(i + 1)), tuple(g.level(i) for g in gens))
        if key not in index:
            index[key] = len(pairs)
            pairs.append(key)
        level_map.append(index[key])
    return SaturationData(val, pairs, tuple(level_map[:n_pre]), tuple(level_map[n_pre:]))


# --- generating sets, level quotients, orbits ------------------------------

def mother_generators(d: int, full: bool = False) -> list[GroupWord]:
    """Generators of G_d: rooted A and the b_2-type / b_empty-type elements of B.

    With ``full`` every element of A_d and of Fix(1) is used; otherwise 3-cycle
    generating sets.
    """
    if full:
        a_d = alternating_group(d)
        fix = [p for p in a_d if p(1) == 1]
    else:
        a_d = _small_alternating_generators(d)
        fix = [_lift_fix_one(x, d) for x in _small_alternating_generators(d - 1)]
    gens = [rooted(s) for s in a_d if not s.is_identity()]
    gens += [BElement.slot(x).to_word() for x in a_d if not x.is_identity()]
    gens += [BElement.empty(r).to_word() for r in fix if not r.is_identity()]
    return gens


def stabilizer_quotient_generators(d: int, j: int, *, full: bool = True,
                                   max_degree: int = DEFAULT_MAX_DEGREE) -> list[Permutation]:
    """Images in G_d / St_j (acting on the d^j vertices of level j) of a generating set."""
    if d < 6:
        raise UnsupportedDegreeError("both A and B are perfect only for d >= 6")
    if d ** j > max_degree:
        raise ResourceLimitError(f"level {j} has {d ** j} vertices (bound {max_degree})")
    return [level_permutation(w, j, max_degree) for w in mother_generators(d, full=full)]


def find_tau(perms: Sequence[Permutation]) -> Permutation | None:
    """An element with tau(1) = 1 and tau^-1(2) not in {1, 2}, searched among the
    given permutations and then their pairwise products."""
    def ok(p):
        return p(1) == 1 and p.inverse()(2) not in (1, 2)
    for p in perms:
        if ok(p):
            return p
    for p, q in itertools.product(perms, repeat=2):
        r = p * q
        if ok(r):
            return r
    return None


def level_orbit(d: int, j: int, start: int = 1) -> set[int]:
    """Orbit (BFS) of a level-j vertex index under the generators of G_d."""
    perms = [level_permutation(w, j) for w in mother_generators(d)]
    return orbit(perms, start)
