"""Finite permutations of {1..d} in one-line notation.

Products are read left to right: ``p * q`` applies ``p`` first, so
``(p * q)(t) == q(p(t))``.  Every other module relies on this convention.
"""
from __future__ import annotations

import functools
import itertools
import random
import re
from collections import deque
from typing import Iterable, Sequence

__all__ = [
    "Permutation",
    "compose",
    "parity",
    "identity",
    "random_alternating",
    "random_permutation",
    "double_perm",
    "alternating_group",
    "symmetric_group",
    "AlternatingTable",
    "alternating_table",
    "orbit",
]

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


class Permutation:
    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        images = tuple(images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        if not images:
            raise ValueError("degree must be at least 1")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def _trusted(cls, images: tuple) -> Permutation:
        p = object.__new__(cls)
        p.images = images
        p._hash = hash(images)
        return p

    @classmethod
    def identity(cls, d: int) -> Permutation:
        return _identity(d)

    @classmethod
    def from_cycles(cls, text: str, d: int) -> Permutation:
        """Parse cycle notation such as ``"(1 2 3)(4 5)"``; ``"e"`` is the identity."""
        text = text.strip()
        images = list(range(1, d + 1))
        if text in ("e", "", "()"):
            return cls._trusted(tuple(images))
        if _CYCLE_RE.sub("", text).strip():
            raise ValueError(f"malformed cycle notation: {text!r}")
        seen: set[int] = set()
        for body in _CYCLE_RE.findall(text):
            pts = [int(x) for x in body.replace(",", " ").split()]
            for x in pts:
                if not 1 <= x <= d or x in seen:
                    raise ValueError(f"bad point {x} in {text!r} for degree {d}")
                seen.add(x)
            for a, b in zip(pts, pts[1:] + pts[:1]):
                images[a - 1] = b
        return cls._trusted(tuple(images))

    @property
    def d(self) -> int:
        return len(self.images)

    def __call__(self, t: int) -> int:
        return self.images[t - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        q = other.images
        if len(q) != len(self.images):
            raise ValueError(f"degree mismatch: {len(self.images)} vs {len(q)}")
        return Permutation._trusted(tuple([q[i - 1] for i in self.images]))

    def inverse(self) -> Permutation:
        inv = [0] * len(self.images)
        for i, x in enumerate(self.images, 1):
            inv[x - 1] = i
        return Permutation._trusted(tuple(inv))

    def __pow__(self, n: int) -> Permutation:
        base = self if n >= 0 else self.inverse()
        out = _identity(self.d)
        for _ in range(abs(n)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.images, 1))

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(1, self.d + 1):
            if start in seen or self(start) == start:
                continue
            cyc = [start]
            seen.add(start)
            x = self(start)
            while x != start:
                cyc.append(x)
                seen.add(x)
                x = self(x)
            out.append(tuple(cyc))
        return out

    def is_even(self) -> bool:
        # a k-cycle is a product of k-1 transpositions
        return sum(len(c) - 1 for c in self.cycles()) % 2 == 0

    def parity(self) -> str:
        return "even" if self.is_even() else "odd"

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.images, 1) if x != i)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: Permutation) -> bool:
        return self.images < other.images

    def __str__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "e"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)

    def __repr__(self) -> str:
        return f"Permutation({str(self)!r}, d={self.d})"


@functools.lru_cache(maxsize=None)
def _identity(d: int) -> Permutation:
    return Permutation._trusted(tuple(range(1, d + 1)))


def identity(d: int) -> Permutation:
    return _identity(d)


def compose(p: Permutation, q: Permutation) -> Permutation:
    """``p`` then ``q``."""
    return p * q


def parity(p: Permutation) -> str:
    return p.parity()


def random_permutation(d: int, rng: random.Random) -> Permutation:
    images = list(range(1, d + 1))
    rng.shuffle(images)
    return Permutation._trusted(tuple(images))


def random_alternating(d: int, fix_one: bool = False, rng: random.Random | None = None) -> Permutation:
    """Uniform element of A_d, or of its point stabilizer Fix(1) when ``fix_one``.

    Fisher-Yates followed by swapping the images of two designated points when
    the draw is odd; the swap is a bijection between the odd and even cosets.
    """
    if d < 3 or (fix_one and d < 4):
        raise ValueError(f"degree {d} too small (fix_one={fix_one})")
    if rng is None:
        rng = random.Random()
    if fix_one:
        tail = list(range(2, d + 1))
        rng.shuffle(tail)
        images = [1] + tail
        i, j = 1, 2
    else:
        images = list(range(1, d + 1))
        rng.shuffle(images)
        i, j = 0, 1
    p = Permutation._trusted(tuple(images))
    if not p.is_even():
        images[i], images[j] = images[j], images[i]
        p = Permutation._trusted(tuple(images))
    return p


def double_perm(p: Permutation) -> Permutation:
    """``p`` on {1..d} together with its shifted copy on {d+1..2d}; always even."""
    d = p.d
    return Permutation._trusted(p.images + tuple(x + d for x in p.images))


@functools.lru_cache(maxsize=None)
def symmetric_group(d: int) -> tuple[Permutation, ...]:
    return tuple(Permutation._trusted(t) for t in itertools.permutations(range(1, d + 1)))


@functools.lru_cache(maxsize=None)
def alternating_group(d: int) -> tuple[Permutation, ...]:
    return tuple(p for p in symmetric_group(d) if p.is_even())


class AlternatingTable:
    """Enumerated A_d with the cosets used by the samplers.

    ``by_preimage_of_one[T]`` lists the even permutations sending T to 1.
    """

    def __init__(self, d: int):
        if d > 8:
            raise ValueError("enumerating A_d is only supported for d <= 8")
        self.d = d
        self.elements = alternating_group(d)
        self.fixing_one = tuple(p for p in self.elements if p(1) == 1)
        self.by_preimage_of_one = {
            t: tuple(p for p in self.elements if p(t) == 1) for t in range(1, d + 1)
        }


@functools.lru_cache(maxsize=None)
def alternating_table(d: int) -> AlternatingTable:
    return AlternatingTable(d)


def orbit(perms: Sequence[Permutation], start: int) -> set[int]:
    """Orbit of ``start`` under the group generated by ``perms`` (BFS)."""
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for p in perms:
            y = p(x)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen
