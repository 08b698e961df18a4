"""Sequences of groups with varying valency.

``L_k^K`` is the analogue of L_k whose vertex at depth l has valency
``d_{K-k+l}``; its boundary ratio ``eps_k^K`` follows the same recursion as
delta_k with the degree changing from step to step.  The amenable group
attached at the bottom is abstracted to the two counts of an :class:`OmegaCore`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

import numpy as np

from .errors import ResourceLimitError
from .folner import DEFAULT_EXACT_INDEX, DEFAULT_MAX_BITS, brute_force_ratio, ratio_recursion
from .mother import BElement, _lift_fix_one, _small_alternating_generators
from .words import DirectedSpec, GroupWord, ValencySequence, is_identity

__all__ = [
    "ValencySequence",
    "EpsilonTable",
    "OmegaCore",
    "DPInstance",
    "epsilon_sequence",
    "f_eval",
    "decay_report",
    "mixed_brute_force",
    "shift_instance",
    "mother_instance",
    "quotient_check",
    "omega_ratio",
]

Valencies = Union[ValencySequence, int]


def _valencies(v: Valencies) -> ValencySequence:
    if isinstance(v, ValencySequence):
        return v
    if isinstance(v, int):
        return ValencySequence.constant(v)
    return ValencySequence.from_config(v)


@dataclass
class EpsilonTable:
    K: int
    values: list
    exact_upto: int

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def exact(self, k: int) -> Fraction:
        v = self.values[k]
        if not isinstance(v, Fraction):
            raise ValueError(f"eps_{k} is only known in floating point")
        return v

    def float(self, k: int) -> float:
        return float(self.values[k])

    @property
    def last(self):
        return self.values[-1]


def epsilon_sequence(valencies: Valencies, K: int, exact_index: int = DEFAULT_EXACT_INDEX,
                     max_bits: int = DEFAULT_MAX_BITS) -> EpsilonTable:
    """``eps_0^K .. eps_K^K`` for ``eps_0 = 1 - 1/d_K`` and step k using ``d_{K-k-1}``."""
    if K < 0:
        raise ValueError("K must be >= 0")
    val = _valencies(valencies)
    steps = [val.d(K - k - 1) for k in range(K)]
    values, upto = ratio_recursion(1 - Fraction(1, val.d(K)), steps, exact_index, max_bits)
    return EpsilonTable(K, values, upto)


def f_eval(D: int, eps):
    """``(1 - eps^(D-1)) / (1 - eps^D)``; exact for rational input."""
    if isinstance(D, bool) or not isinstance(D, (int, np.integer)) or D < 2:
        raise ValueError(f"D must be an integer >= 2, got {D!r}")
    if isinstance(eps, bool):
        raise ValueError("eps must be a number in (0, 1)")
    if isinstance(eps, Rational):
        eps = Fraction(eps)
    elif not isinstance(eps, float):
        raise ValueError(f"eps must be rational or float, got {type(eps).__name__}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    D = int(D)
    return (1 - eps ** (D - 1)) / (1 - eps ** D)


@dataclass
class DecayRow:
    K: int
    eps: float
    normalized: float | None


def decay_report(valencies: Valencies, K_max: int, eta: float | None = None) -> list[DecayRow]:
    """Float ``eps_K^K`` for every K <= K_max, with ``eps_K^K * K^eta`` when ``eta`` is given.

    All K advance together: after step j the entry for K has used degrees
    ``d_{K-1}, ..., d_{K-j-1}``.
    """
    if K_max < 0:
        raise ValueError("K_max must be >= 0")
    val = _valencies(valencies)
    if eta is not None:
        bound = val.bound()
        if not 0 < eta < 1 / (bound - 1):
            raise ValueError(f"eta must lie in (0, 1/(D-1)) = (0, {1 / (bound - 1):.6g})")
    d = np.array(val.take(K_max + 1), dtype=np.float64)
    eps = 1.0 - 1.0 / d
    for j in range(K_max):
        D = d[:K_max - j]
        e = eps[j + 1:]
        eps[j + 1:] = e * (1.0 - e ** (D - 1)) / (1.0 - e ** D)
    rows = []
    for K in range(K_max + 1):
        norm = None
        if eta is not None:
            norm = float(eps[K] * K ** eta)
        rows.append(DecayRow(K, float(eps[K]), norm))
    return rows


def mixed_brute_force(valencies: Valencies, K: int, k: int, max_assignments: int = 1 << 22) -> Fraction:
    """Brute-force interior ratio of ``L_k^K`` (depth l has valency ``d_{K-k+l}``)."""
    if not 0 <= k <= K:
        raise ValueError("need 0 <= k <= K")
    val = _valencies(valencies)
    return brute_force_ratio([val.d(K - k + l) for l in range(k + 1)], max_assignments=max_assignments)


# --- instances ---------------------------------------------------------------

@dataclass(frozen=True)
class OmegaCore:
    size: int
    interior_size: int

    def __post_init__(self):
        if not 0 < self.interior_size <= self.size:
            raise ValueError("need 0 < interior_size <= size")

    def ratio(self) -> Fraction:
        return Fraction(self.interior_size, self.size)


def omega_ratio(core: OmegaCore, eps_K_K):
    """Interior ratio ``(1 - eps_K^K) |Int Omega| / |Omega|`` of the assembled set."""
    if isinstance(eps_K_K, float):
        return (1 - eps_K_K) * float(core.ratio())
    return (1 - Fraction(eps_K_K)) * core.ratio()


class DPInstance:
    """Valencies, transitive rooted groups and the directed generators of B_0.

    Each generator is a :class:`DirectedSpec`, so ``b_i = (b_{i+1}, a_2, ...) rho``
    with ``rho(1) = 1`` holds by construction; the shift map is ``spec.shift()``.
    """

    def __init__(self, valencies: Valencies, generators: Sequence[DirectedSpec], rooted: str = "alternating"):
        self.valencies = _valencies(valencies)
        self.generators = tuple(generators)
        self.rooted = rooted
        self.validate()

    def validate(self) -> None:
        if self.rooted not in ("alternating", "symmetric"):
            raise ValueError(f"unknown rooted group family {self.rooted!r}")
        if not self.generators:
            raise ValueError("need at least one directed generator")
        horizon = len(self.valencies.prefix) + max(len(self.valencies.period), 1) + 1
        if not self.valencies.is_periodic:
            horizon = 64
        for i in range(horizon):
            d = self.valencies.d(i)
            if d < 2 or (self.rooted == "alternating" and d < 3):
                raise ValueError(f"rooted {self.rooted} group of degree {d} is not transitive (level {i})")
        for g in self.generators:
            if not isinstance(g, DirectedSpec):
                raise ValueError("generators must be directed specs")
            if g.valency != self.valencies:
                raise ValueError("generator lives on a different tree")
            if self.rooted == "alternating" and not g.is_alternate():
                raise ValueError("alternating instance with odd directed data")

    def word(self, letters: Sequence[tuple[int, int]]) -> GroupWord:
        """Word from ``(generator index, +-1)`` pairs."""
        return GroupWord([(self.generators[i], e) for i, e in letters], self.valencies)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DPInstance) and self.valencies == other.valencies
                and self.generators == other.generators and self.rooted == other.rooted)

    def __repr__(self) -> str:
        return f"DPInstance({self.valencies!r}, {len(self.generators)} generators, {self.rooted})"


def mother_instance(d: int) -> DPInstance:
    """Diagonal instance of G_d: constant slot-2 and rho-only generators of B."""
    gens = [BElement.slot(x).to_spec() for x in _small_alternating_generators(d)]
    gens += [BElement.empty(_lift_fix_one(x, d)).to_spec() for x in _small_alternating_generators(d - 1)]
    return DPInstance(d, gens)


def shift_instance(inst: DPInstance) -> DPInstance:
    """Drop level 0: valencies and every generator shift by one."""
    inst.validate()
    return DPInstance(inst.valencies.shift(), [g.shift() for g in inst.generators], inst.rooted)


def _order(spec: DirectedSpec, bound: int = 100_000) -> int:
    x, n = spec, 1
    while not x.is_identity():
        x = x * spec
        n += 1
        if n > bound:
            raise ResourceLimitError(f"element order exceeds {bound}")
    return n


def quotient_check(inst: DPInstance, n: int, seed: int, max_len: int = 6) -> dict:
    """Sample trivial words over B_0 (conjugated powers ``y x^m y^-1`` with m the
    order of x) and confirm their letterwise shifts are trivial over B_1."""
    rng = random.Random(f"altfolner:quotient:{seed}")
    shifted = shift_instance(inst)
    ng = len(inst.generators)
    failures = []
    for trial in range(n):
        x = [(rng.randrange(ng), rng.choice((1, -1))) for _ in range(rng.randint(1, max_len))]
        y = [(rng.randrange(ng), rng.choice((1, -1))) for _ in range(rng.randint(0, max_len))]
        xs = inst.word(x)
        red = xs.reduced().letters
        m = _order(red[0][0]) if red else 1
        letters = y + x * m + [(i, -e) for i, e in reversed(y)]
        if not is_identity(inst.word(letters)):
            failures.append({"trial": trial, "stage": "B_0", "letters": letters})
        elif not is_identity(shifted.word(letters)):
            failures.append({"trial": trial, "stage": "B_1", "letters": letters})
    return {"n": n, "failures": failures[:3], "n_failures": len(failures)}
