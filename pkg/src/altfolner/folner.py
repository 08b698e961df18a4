"""The sets L_k of the alternate mother group as combinatorial profiles.

An element of L_k is ``g = (g_v)_{|v|=k+1} (sigma_v)_{|v|<=k}``: permutations
``sigma_v`` in A_d on the vertices of depth <= k and, on depth k+1, a label in
B at every child 1 and a label in A at children 2..d.  Membership and the
interior only depend on the directions ``u_v = sigma_v^-1(1)``: a vertex of
depth k is open iff ``u_v = 1``; a shallower vertex is open iff its child
``u_v`` is open; ``g`` is in L_k iff every vertex has an open child, and in the
interior iff the root is open.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import ResourceLimitError
from .mother import BElement, rooted, slot_word
from .perm import Permutation, alternating_table, identity
from .words import GroupWord, decompose, equal, portrait, section

__all__ = [
    "FolnerProfile",
    "RatioSequence",
    "CountPair",
    "FolnerSampler",
    "delta_sequence",
    "cardinalities",
    "closed_form_size",
    "is_member",
    "is_interior",
    "profile_mul_generator",
    "sample_profile",
    "brute_force_ratio",
    "recognize_word",
    "profile_to_word",
    "folner_function_bound",
    "lemma_check",
    "calibrate",
    "DEFAULT_EXACT_INDEX",
    "DEFAULT_MAX_BITS",
]

DEFAULT_EXACT_INDEX = 64
# exact delta_k has about (d-1)^k times the bits of delta_0; beyond this we switch to floats
DEFAULT_MAX_BITS = 1 << 18

Leaf = Union[BElement, Permutation]


def _vertices(degrees: Sequence[int], depth: int) -> Iterator[tuple[int, ...]]:
    if depth == 0:
        yield ()
        return
    for v in _vertices(degrees, depth - 1):
        for t in range(1, degrees[depth - 1] + 1):
            yield v + (t,)


@dataclass
class FolnerProfile:
    """Labels of an element of the k-th iterated wreath decomposition.

    ``degrees[l]`` is the valency at depth ``l``; ``leaves`` may be ``None``
    when only the combinatorics of the internal labels matter.
    """

    k: int
    degrees: tuple[int, ...]
    internal: dict
    leaves: dict | None = None
    _open: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.degrees = tuple(self.degrees)
        if len(self.degrees) != self.k + 1:
            raise ValueError(f"need {self.k + 1} degrees, got {len(self.degrees)}")

    @classmethod
    def build(cls, d: int, k: int, internal: dict, leaves: dict | None) -> FolnerProfile:
        p = cls(k, (d,) * (k + 1), dict(internal), None if leaves is None else dict(leaves))
        p.validate()
        return p

    @property
    def d(self) -> int:
        if len(set(self.degrees)) != 1:
            raise ValueError("profile has mixed degrees")
        return self.degrees[0]

    @classmethod
    def from_directions(cls, degrees: Sequence[int], u: dict) -> FolnerProfile:
        """Skeleton without leaves whose vertex v has ``sigma_v^-1(1) = u[v]``.

        Labels are even when the degree allows it (d >= 3); for d = 2 the
        transposition is used, which only matters for toy combinatorics.
        """
        degrees = tuple(degrees)
        internal = {}
        for depth, deg in enumerate(degrees):
            for v in _vertices(degrees, depth):
                t = u.get(v, 1)
                if not 1 <= t <= deg:
                    raise ValueError(f"direction {t} at {v} outside 1..{deg}")
                if t == 1:
                    internal[v] = identity(deg)
                elif deg == 2:
                    internal[v] = Permutation((2, 1))
                else:
                    other = next(x for x in range(2, deg + 1) if x != t)
                    internal[v] = Permutation.from_cycles(f"({t} 1 {other})", deg)
        return cls(len(degrees) - 1, degrees, internal)

    def validate(self) -> None:
        """Reject malformed profiles, including leaf blocks of the wrong kind.

        Skeletons without leaves only need permutations of the right degree.
        """
        even = self.leaves is not None
        for depth in range(self.k + 1):
            for v in _vertices(self.degrees, depth):
                s = self.internal.get(v)
                if not isinstance(s, Permutation) or s.d != self.degrees[depth] or (even and not s.is_even()):
                    raise ValueError(f"vertex {v}: need an {'even ' if even else ''}permutation "
                                     f"of degree {self.degrees[depth]}")
        if self.leaves is None:
            return
        for v in _vertices(self.degrees, self.k + 1):
            lab = self.leaves.get(v)
            if v[-1] == 1:
                if not isinstance(lab, BElement):
                    raise ValueError(f"leaf {v} must be in B")
            elif not isinstance(lab, Permutation) or not lab.is_even():
                raise ValueError(f"leaf {v} must be in A")

    def direction(self, v) -> int:
        """``sigma_v^-1(1)``."""
        return self.internal[v].images.index(1) + 1

    def open_sets(self) -> dict:
        """``I(v)`` for every internal vertex (the L_0 convention ``I = {1}`` at depth k)."""
        if self._open is None:
            k, degs = self.k, self.degrees
            opened = {}
            sets = {}
            for v in _vertices(degs, k):
                sets[v] = frozenset({1})
                opened[v] = self.direction(v) == 1
            for depth in range(k - 1, -1, -1):
                for v in _vertices(degs, depth):
                    I = frozenset(t for t in range(1, degs[depth] + 1) if opened[v + (t,)])
                    sets[v] = I
                    opened[v] = self.direction(v) in I
            self._open = sets
        return self._open

    def is_open(self, v) -> bool:
        return self.direction(v) in self.open_sets()[v]

    def spine(self) -> tuple[int, ...]:
        """Addresses tau_0 tau_1 ... tau_k with ``g(tau_0 ... tau_k) = 1 ... 1``."""
        v: tuple[int, ...] = ()
        for _ in range(self.k + 1):
            v = v + (self.direction(v),)
        return v

    def copy(self) -> FolnerProfile:
        return FolnerProfile(self.k, self.degrees, dict(self.internal),
                             None if self.leaves is None else dict(self.leaves))


def is_member(p: FolnerProfile) -> bool:
    return all(p.open_sets().values())


def is_interior(p: FolnerProfile) -> bool:
    if not is_member(p):
        raise ValueError("interior is only defined for members of L_k")
    return p.is_open(())


# --- exact recursions ---------------------------------------------------------

@dataclass
class RatioSequence:
    """Boundary ratios delta_0, delta_1, ...: exact up to ``exact_upto``, floats after."""

    d: int
    values: list
    exact_upto: int

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def exact(self, k: int) -> Fraction:
        v = self.values[k]
        if not isinstance(v, Fraction):
            raise ValueError(f"delta_{k} is only known in floating point")
        return v

    def float(self, k: int) -> float:
        return float(self.values[k])

    def floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.values])


def next_ratio(delta, d: int):
    """One step of ``1 - delta' = (1 - delta) / (1 - delta^d)`` written as
    ``delta' = delta (1 - delta^(d-1)) / (1 - delta^d)`` (no cancellation in floats)."""
    return delta * (1 - delta ** (d - 1)) / (1 - delta ** d)


def _bits(x: Fraction) -> int:
    return max(x.numerator.bit_length(), x.denominator.bit_length())


def _exact_step(p: int, q: int, deg: int) -> tuple[int, int]:
    """``p/q -> p S_{deg-2} / S_{deg-1}`` with ``S_m = sum_i q^(m-i) p^i``.

    The common factor ``q - p`` is cancelled by hand, which keeps the integers
    small; the result is in lowest terms whenever ``p/q`` is.
    """
    s_lo = sum(q ** (deg - 2 - i) * p ** i for i in range(deg - 1))
    s_hi = q * s_lo + p ** (deg - 1)
    return p * s_lo, s_hi


def ratio_recursion(first, degrees: Sequence[int], exact_index: int = DEFAULT_EXACT_INDEX,
                    max_bits: int = DEFAULT_MAX_BITS) -> tuple[list, int]:
    """Iterate ``next_ratio`` with the given per-step degrees starting from ``first``."""
    values = [first]
    exact_upto = 0 if isinstance(first, Fraction) else -1
    x = first
    for step, deg in enumerate(degrees, 1):
        if isinstance(x, Fraction) and (step > exact_index or _bits(x) * (deg - 1) > max_bits):
            x = float(x)
        if isinstance(x, Fraction):
            num, den = _exact_step(x.numerator, x.denominator, deg)
            x = Fraction(num, den)
            exact_upto = step
        else:
            x = next_ratio(x, deg)
        values.append(x)
    return values, exact_upto


def delta_sequence(d: int, k_max: int, exact_index: int = DEFAULT_EXACT_INDEX,
                   max_bits: int = DEFAULT_MAX_BITS) -> RatioSequence:
    if d < 2 or k_max < 0:
        raise ValueError("need d >= 2 and k_max >= 0")
    values, upto = ratio_recursion(1 - Fraction(1, d), [d] * k_max, exact_index, max_bits)
    return RatioSequence(d, values, upto)


@dataclass(frozen=True)
class CountPair:
    interior: int
    boundary: int

    @property
    def total(self) -> int:
        return self.interior + self.boundary

    def interior_ratio(self) -> Fraction:
        return Fraction(self.interior, self.total)


def group_orders(d: int) -> tuple[int, int]:
    """``(|A|, |B|)`` for the mother group of degree d."""
    a = math.factorial(d) // 2
    fix = math.factorial(d - 1) // 2
    return a, a ** (d - 1) * fix


def cardinalities(d: int, k_max: int, max_bits: int = 1 << 26) -> list[CountPair]:
    """Exact ``|Int(L_k)|`` and ``|boundary(L_k)|`` for k <= k_max.

    ``|L_{k+1}| = |A| (|L_k|^d - |bd L_k|^d)`` (at least one child interior) and
    ``|Int L_{k+1}| = |A| |Int L_k| |L_k|^(d-1)`` (the child below sigma^-1(1) interior).
    """
    if d < 3:
        raise ValueError("cardinalities need d >= 3 (A_d transitive)")
    a, b = group_orders(d)
    total = b * a ** d
    interior = b * a ** (d - 1) * (a // d)
    est = total.bit_length()
    for k in range(k_max):
        est = d * est + a.bit_length()
        if est > max_bits:
            raise ResourceLimitError(f"|L_{k + 1}| needs about {est} bits (bound {max_bits})")
    out = [CountPair(interior, total - interior)]
    for k in range(k_max):
        bd = total - interior
        new_total = a * (total ** d - bd ** d)
        new_interior = a * interior * total ** (d - 1)
        total, interior = new_total, new_interior
        out.append(CountPair(interior, total - interior))
    return out


def closed_form_size(d: int, k: int) -> int:
    """``|B|^(d^k) |A|^((d-1) d^k + d^k + ... + d + 1)``: every label free, an upper
    bound for ``|L_k|`` (equal at k = 0)."""
    a, b = group_orders(d)
    return b ** (d ** k) * a ** ((d - 1) * d ** k + sum(d ** j for j in range(k + 1)))


def log2_cardinalities(d: int, deltas: RatioSequence) -> list[float]:
    a, b = group_orders(d)
    logs = [math.log2(b) + d * math.log2(a)]
    for k in range(len(deltas) - 1):
        dk = float(deltas[k])
        logs.append(math.log2(a) + d * logs[-1] + math.log2(1 - dk ** d))
    return logs


def loglog2_cardinality(d: int, deltas: RatioSequence, k: int) -> float:
    """``log2 log2 |L_k|`` without overflow: track ``x_k = log2|L_k| / d^k``."""
    a, b = group_orders(d)
    x = math.log2(b) + d * math.log2(a)
    for j in range(k):
        dj = float(deltas[j])
        x += (math.log2(a) + math.log2(1 - dj ** d)) * d ** -(j + 1)
    return math.log2(x) + k * math.log2(d)


@dataclass
class FolnerBound:
    k_star: int
    delta: object
    log2_size: float | None
    loglog2_size: float | None
    size: int | None


def folner_function_bound(d: int, n: int, max_bits: int = 1 << 22) -> FolnerBound:
    """Smallest k with ``delta_k <= 1/n`` and the size of that L_k.

    The exact size is returned when it fits in ``max_bits``, ``log2_size`` when
    it is a finite float, ``loglog2_size`` always (d >= 3).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    target = Fraction(1, n)
    k_cap = 10
    while True:
        deltas = delta_sequence(d, k_cap)
        hit = next((k for k, x in enumerate(deltas.values) if x <= target), None)
        if hit is not None:
            break
        k_cap *= 4
    size = log2_size = loglog = None
    if d >= 3:
        loglog = loglog2_cardinality(d, deltas, hit)
        if loglog < 1000:
            log2_size = 2.0 ** loglog
            if log2_size <= max_bits:
                size = cardinalities(d, hit, max_bits=max_bits + 64)[hit].total
    return FolnerBound(hit, deltas[hit], log2_size, loglog, size)


# --- brute-force oracle -----------------------------------------------------

def brute_force_ratio(d_or_degrees: Union[int, Sequence[int]], k: int | None = None,
                      max_assignments: int = 1 << 22, chunk: int = 1 << 18) -> Fraction:
    """Interior/member ratio by enumerating every assignment of directions.

    Pass ``(d, k)`` for the regular tree or a list of per-depth valencies (depth
    0 first, length k+1).  Directions ``u_v`` are uniform because each value is
    hit by the same number of even permutations.
    """
    if k is None:
        degrees = tuple(d_or_degrees)
    else:
        degrees = (int(d_or_degrees),) * (k + 1)
    k = len(degrees) - 1
    counts = [math.prod(degrees[:l]) for l in range(k + 1)]
    total = math.prod(degrees[l] ** counts[l] for l in range(k + 1))
    if total > max_assignments:
        raise ResourceLimitError(f"{total} direction assignments exceed the bound {max_assignments}")
    members = interiors = 0
    for start in range(0, total, chunk):
        r = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = []
        for l in range(k + 1):
            u = np.empty((counts[l], r.size), dtype=np.int64)
            for i in range(counts[l]):
                u[i] = r % degrees[l]
                r //= degrees[l]
            digits.append(u)            # 0-based directions
        opened = digits[k] == 0
        member = np.ones(digits[0].shape[1], dtype=bool)
        for l in range(k - 1, -1, -1):
            kids = opened.reshape(counts[l], degrees[l], -1)
            member &= kids.any(axis=1).all(axis=0)
            opened = np.take_along_axis(kids, digits[l][:, None, :], axis=1)[:, 0, :]
        members += int(member.sum())
        interiors += int((member & opened[0]).sum())
    return Fraction(interiors, members)


# --- right multiplication by generators -------------------------------------

def _leaf_mul(leaf: Leaf, m) -> Leaf | None:
    """Product of a depth-(k+1) label with a section of a generator, or None when
    the product leaves its class (B*A in B iff the A factor is trivial, and
    A*B in A iff the B factor is trivial)."""
    if isinstance(leaf, BElement):
        if isinstance(m, BElement):
            return leaf * m
        return leaf if m.is_identity() else None
    if isinstance(m, Permutation):
        return leaf * m
    return leaf if m.is_identity() else None


def profile_mul_generator(p: FolnerProfile, s: Union[Permutation, BElement]) -> FolnerProfile | None:
    """Profile of ``g s`` for a rooted ``a(s)`` or ``b`` in B; None when ``g s`` is not in L_k."""
    if p.leaves is None:
        raise ValueError("multiplication needs leaf labels")
    d, k = p.d, p.k
    q = p.copy()
    if isinstance(s, Permutation):
        q.internal[()] = q.internal[()] * s
        return q if is_member(q) else None
    b = s
    internal, leaves = q.internal, q.leaves
    v: tuple[int, ...] = ()
    for depth in range(k + 1):
        sigma = internal[v]
        internal[v] = sigma * b.rho
        nxt = None
        for t in range(1, d + 1):
            img = sigma(t)
            child = v + (t,)
            m = b if img == 1 else b.a[img - 2]
            if depth == k:
                new = _leaf_mul(leaves[child], m)
                if new is None:
                    return None
                leaves[child] = new
            elif img == 1:
                nxt = child
            else:
                internal[child] = internal[child] * m
        v = nxt
    return q if is_member(q) else None


# --- uniform sampling ---------------------------------------------------------

STRATA = ("member", "interior", "boundary")


class FolnerSampler:
    """Exactly uniform sampling from L_k, Int(L_k) or its boundary.

    ``L_{k+1}`` is the disjoint union over nonempty I of the sets J_I (children
    in I interior, the others boundary); a stratum fixes how the root direction
    relates to I, which reweights the size-|I| classes by i/d or (d-i)/d.
    """

    def __init__(self, d: int, k: int, leaves: bool = True):
        self.d, self.k, self.with_leaves = d, k, leaves
        self.table = alternating_table(d)
        self.deltas = delta_sequence(d, max(k - 1, 0))
        self._weights = {}
        for level in range(k):              # children are L_level elements
            delta = self.deltas[level]
            base = [math.comb(d, i) * (1 - delta) ** i * delta ** (d - i) for i in range(1, d + 1)]
            for stratum in STRATA:
                if stratum == "interior":
                    w = [x * i for i, x in enumerate(base, 1)]
                elif stratum == "boundary":
                    w = [x * (d - i) for i, x in enumerate(base, 1)]
                else:
                    w = base
                self._weights[(level, stratum)] = [float(x / sum(w)) for x in w]

    def _sigma(self, stratum: str, I, rng: random.Random) -> Permutation:
        tab = self.table
        if stratum == "member":
            return rng.choice(tab.elements)
        if stratum == "interior":
            target = rng.choice(I)
        else:
            target = rng.choice([t for t in range(1, self.d + 1) if t not in I])
        return rng.choice(tab.by_preimage_of_one[target])

    def _fill(self, v, level, stratum, rng, internal, leaves):
        d, tab = self.d, self.table
        if level == 0:
            internal[v] = self._sigma(stratum, (1,), rng)
            if leaves is not None:
                labels = rng.choices(tab.elements, k=2 * (d - 1))
                leaves[v + (1,)] = BElement(labels[:d - 1], rng.choice(tab.fixing_one), check=False)
                for t in range(2, d + 1):
                    leaves[v + (t,)] = labels[d - 1 + t - 2]
            return
        i = rng.choices(range(1, d + 1), weights=self._weights[(level - 1, stratum)])[0]
        I = sorted(rng.sample(range(1, d + 1), i))
        internal[v] = self._sigma(stratum, I, rng)
        Iset = set(I)
        for t in range(1, d + 1):
            self._fill(v + (t,), level - 1, "interior" if t in Iset else "boundary", rng, internal, leaves)

    def sample(self, stratum: str = "member", rng: random.Random | None = None) -> FolnerProfile:
        if stratum not in STRATA:
            raise ValueError(f"unknown stratum {stratum!r}")
        rng = rng or random.Random()
        internal: dict = {}
        leaves = {} if self.with_leaves else None
        self._fill((), self.k, stratum, rng, internal, leaves)
        return FolnerProfile(self.k, (self.d,) * (self.k + 1), internal, leaves)


def sample_profile(d: int, k: int, stratum: str = "member", rng: random.Random | None = None) -> FolnerProfile:
    return FolnerSampler(d, k).sample(stratum, rng)


def stream_rng(seed: int, stream: int) -> random.Random:
    """Independent generator for task ``stream`` of a run seeded with ``seed``."""
    return random.Random(f"altfolner:{seed}:{stream}")


CHUNK = 10_000


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, n - i * CHUNK)) for i in range((n + CHUNK - 1) // CHUNK)]


def _calibrate_chunk(d, k, seed, stream, count):
    sampler = FolnerSampler(d, k, leaves=False)
    rng = stream_rng(seed, stream)
    hits = 0
    for _ in range(count):
        p = sampler.sample("member", rng)
        hits += p.is_open(())
    return hits


def calibrate(d: int, k: int, n: int, seed: int, jobs: int = 1) -> dict:
    """Interior fraction of ``n`` member-stratum samples against ``1 - delta_k``.

    Work is split into fixed chunks with their own streams, so the result does
    not depend on ``jobs``.
    """
    chunks = _chunks(n)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(jobs) as ex:
            hits = sum(ex.map(_calibrate_chunk, *zip(*[(d, k, seed, s, c) for s, c in chunks])))
    else:
        hits = sum(_calibrate_chunk(d, k, seed, s, c) for s, c in chunks)
    expected = 1 - delta_sequence(d, k)[k]
    frac = hits / n
    se = math.sqrt(float(expected) * (1 - float(expected)) / n)
    return {"d": d, "k": k, "n": n, "interior": hits, "fraction": frac,
            "expected": expected, "se": se, "z": (frac - float(expected)) / se}


# --- right-multiplication suite ----------------------------------------------

def _lemma_chunk(d, k, seed, stream, count):
    sampler = FolnerSampler(d, k)
    tab = sampler.table
    rng = stream_rng(seed, stream)
    viol = {"ga_member": 0, "gb_member_iff_interior": 0, "gb_interior": 0}
    witnesses = []
    n_interior = 0
    for trial in range(count):
        g = sampler.sample("member", rng)
        a = rng.choice(tab.elements)
        b = BElement(rng.choices(tab.elements, k=d - 1), rng.choice(tab.fixing_one), check=False)
        interior = is_interior(g)
        n_interior += interior
        ga = profile_mul_generator(g, a)
        gb = profile_mul_generator(g, b)
        bad = []
        if ga is None:
            bad.append("ga_member")
        if (gb is not None) != (interior or b.is_identity()):
            bad.append("gb_member_iff_interior")
        if interior and (gb is None or not is_interior(gb)):
            bad.append("gb_interior")
        for name in bad:
            viol[name] += 1
        if bad and len(witnesses) < 3:
            witnesses.append({"stream": stream, "trial": trial, "violated": bad,
                              "profile": profile_to_json(g), "a": str(a), "b": b_to_json(b)})
    return viol, witnesses, n_interior


def lemma_check(d: int, k: int, n: int, seed: int, jobs: int = 1) -> dict:
    """Sampled check of: ``ga`` in L_k; ``gb`` in L_k iff g interior (or b = e);
    g interior implies ``gb`` interior."""
    chunks = _chunks(n)
    args = [(d, k, seed, s, c) for s, c in chunks]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_lemma_chunk, *zip(*args)))
    else:
        results = [_lemma_chunk(*x) for x in args]
    viol = {"ga_member": 0, "gb_member_iff_interior": 0, "gb_interior": 0}
    witnesses = []
    interiors = 0
    for v, w, ni in results:
        for key in viol:
            viol[key] += v[key]
        witnesses.extend(w)
        interiors += ni
    return {"d": d, "k": k, "n": n, "interior_samples": interiors,
            "violations": viol, "witnesses": witnesses[:3]}


# --- words <-> profiles -----------------------------------------------------

def _recognize_leaf(s: GroupWord, in_b: bool) -> Leaf | None:
    dec = decompose(s)
    if not in_b:
        x = dec.root
        if not x.is_even() or not equal(s, rooted(x)):
            return None
        return x
    rho = dec.root
    if rho(1) != 1 or not rho.is_even():
        return None
    labels = [decompose(sec).root for sec in dec.sections[1:]]
    if not all(x.is_even() for x in labels):
        return None
    b = BElement(labels, rho)
    return b if equal(s, b.to_word()) else None


def recognize_word(w: GroupWord, k: int) -> FolnerProfile | None:
    """Profile of the element ``w`` when it lies in L_k, otherwise None."""
    val = w.valency
    d = val.d(0)
    if any(val.d(i) != d for i in range(k + 2)):
        raise ValueError("recognition is implemented for the regular tree")
    por = portrait(w, k + 1)
    internal = {}
    for v, lab in por.labels.items():
        if not lab.is_even():
            return None
        internal[v] = lab
    leaves = {}
    degs = (d,) * (k + 1)
    for v in _vertices(degs, k + 1):
        leaf = _recognize_leaf(section(w, v), v[-1] == 1)
        if leaf is None:
            return None
        leaves[v] = leaf
    p = FolnerProfile(k, degs, internal, leaves)
    return p if is_member(p) else None


def profile_to_word(p: FolnerProfile) -> GroupWord:
    """A word over the generators of G_d representing the profile's element."""
    d, k = p.d, p.k

    def build(v, depth):
        if depth == k:
            kids = [p.leaves[v + (1,)].to_word()] + [rooted(p.leaves[v + (t,)]) for t in range(2, d + 1)]
        else:
            kids = [build(v + (t,), depth + 1) for t in range(1, d + 1)]
        w = GroupWord.identity(d)
        for t, kid in enumerate(kids, 1):
            if kid.letters:
                w = w * slot_word(kid, t)
        return w * rooted(p.internal[v])

    return build((), 0)


# --- serialization --------------------------------------------------------------

def b_to_json(b: BElement) -> dict:
    return {"a": [str(x) for x in b.a], "rho": str(b.rho)}


def b_from_json(obj: dict, d: int) -> BElement:
    return BElement([Permutation.from_cycles(x, d) for x in obj["a"]], Permutation.from_cycles(obj["rho"], d))


def profile_to_json(p: FolnerProfile) -> dict:
    """Nested vertex records with cycle-notation labels."""
    def rec(v, depth):
        node = {"sigma": str(p.internal[v])}
        if depth == p.k:
            if p.leaves is not None:
                node["leaves"] = [b_to_json(p.leaves[v + (1,)])] + [str(p.leaves[v + (t,)]) for t in range(2, p.degrees[depth] + 1)]
        else:
            node["children"] = [rec(v + (t,), depth + 1) for t in range(1, p.degrees[depth] + 1)]
        return node
    return {"k": p.k, "degrees": list(p.degrees), "root": rec((), 0)}


def profile_from_json(obj: dict) -> FolnerProfile:
    k = int(obj["k"])
    degrees = tuple(obj["degrees"]) if "degrees" in obj else (int(obj["d"]),) * (k + 1)
    internal, leaves = {}, {}
    has_leaves = True

    def rec(node, v, depth):
        nonlocal has_leaves
        deg = degrees[depth]
        internal[v] = Permutation.from_cycles(node["sigma"], deg)
        if depth == k:
            if "leaves" not in node:
                has_leaves = False
                return
            labs = node["leaves"]
            if len(labs) != deg:
                raise ValueError(f"vertex {v}: expected {deg} leaf labels")
            nd = deg
            leaves[v + (1,)] = b_from_json(labs[0], nd)
            for t in range(2, deg + 1):
                leaves[v + (t,)] = Permutation.from_cycles(labs[t - 1], nd)
        else:
            kids = node["children"]
            if len(kids) != deg:
                raise ValueError(f"vertex {v}: expected {deg} children")
            for t, child in enumerate(kids, 1):
                rec(child, v + (t,), depth + 1)

    rec(obj["root"], (), 0)
    p = FolnerProfile(k, degrees, internal, leaves if has_leaves else None)
    p.validate()
    return p
