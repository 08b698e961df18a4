"""Tree automorphisms given as words over rooted and directed generators.

A letter is either a :class:`~altfolner.perm.Permutation` (the rooted
automorphism acting on the first coordinate) or a :class:`DirectedSpec`
(an automorphism supported along the spine 1 1 1 ...).  Under the wreath
decomposition an element is ``(g_1, ..., g_d) sigma`` and acts on vertices by

    t_0 t_1 ...  ->  sigma(t_0) g_{t_0}(t_1 ...)

so that the product ``g g'`` (``g`` first) has sections ``g_t g'_{sigma(t)}``
and root ``sigma sigma'``.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

from .errors import ResourceLimitError
from .perm import Permutation, identity

__all__ = [
    "ValencySequence",
    "LevelData",
    "DirectedSpec",
    "Letter",
    "GroupWord",
    "Decomposition",
    "Portrait",
    "decompose",
    "act",
    "section",
    "portrait",
    "is_identity",
    "equal",
    "commutator",
    "level_permutation",
    "parse_word",
    "format_word",
    "FORMULAS",
    "DEFAULT_MAX_DEGREE",
]

DEFAULT_MAX_DEGREE = 1_000_000


def _canonical(prefix: tuple, period: tuple) -> tuple[tuple, tuple]:
    """Shortest (prefix, period) description of an eventually periodic sequence."""
    n = len(period)
    for p in range(1, n + 1):
        if n % p == 0 and period == period[:p] * (n // p):
            period = period[:p]
            break
    while prefix and prefix[-1] == period[-1]:
        prefix = prefix[:-1]
        period = period[-1:] + period[:-1]
    return prefix, period


def _sqrt_log(k: int) -> int:
    return 5 + int(math.floor(math.sqrt(math.log(k + 2))))


FORMULAS: dict[str, Callable[[int], int]] = {
    "5+floor(sqrt(log(k+2)))": _sqrt_log,
    "5+floor(log(log(k+3)))": lambda k: 5 + int(math.floor(math.log(math.log(k + 3)))),
    "5+floor(log(k+1)/2)": lambda k: 5 + int(math.floor(math.log(k + 1) / 2)),
}


class ValencySequence:
    """The valencies (d_0, d_1, ...) of a spherically homogeneous rooted tree.

    Either eventually periodic (``prefix`` then ``period`` repeated) or one of
    the named builtin ``FORMULAS`` evaluated at ``k + offset``.
    """

    __slots__ = ("prefix", "period", "formula", "offset", "_hash")

    def __init__(self, prefix: Iterable[int] = (), period: Iterable[int] = (), *,
                 formula: str | None = None, offset: int = 0):
        prefix, period = tuple(prefix), tuple(period)
        if formula is not None:
            if formula not in FORMULAS:
                raise ValueError(f"unknown valency formula {formula!r}; known: {sorted(FORMULAS)}")
            if prefix or period:
                raise ValueError("formula valencies take no prefix/period")
        else:
            if not period:
                raise ValueError("period must be nonempty")
            if any(int(x) < 2 for x in prefix + period):
                raise ValueError("valencies must be >= 2")
            prefix, period = _canonical(tuple(map(int, prefix)), tuple(map(int, period)))
            offset = 0
        self.prefix = prefix
        self.period = period
        self.formula = formula
        self.offset = offset
        self._hash = hash((prefix, period, formula, offset))

    @classmethod
    def constant(cls, d: int) -> ValencySequence:
        return cls((), (d,))

    @classmethod
    def from_config(cls, cfg) -> ValencySequence:
        if isinstance(cfg, int):
            return cls.constant(cfg)
        if "constant" in cfg:
            return cls.constant(int(cfg["constant"]))
        if "formula" in cfg:
            return cls(formula=cfg["formula"])
        if "period" in cfg:
            return cls(cfg.get("prefix", ()), cfg["period"])
        raise ValueError(f"bad valency spec: {cfg!r}")

    def to_config(self) -> dict:
        if self.formula is not None:
            return {"formula": self.formula, "offset": self.offset}
        if not self.prefix and len(self.period) == 1:
            return {"constant": self.period[0]}
        return {"prefix": list(self.prefix), "period": list(self.period)}

    @property
    def is_periodic(self) -> bool:
        return self.formula is None

    def d(self, i: int) -> int:
        if self.formula is not None:
            return FORMULAS[self.formula](i + self.offset)
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def __getitem__(self, i: int) -> int:
        return self.d(i)

    def take(self, n: int) -> list[int]:
        return [self.d(i) for i in range(n)]

    def shift(self) -> ValencySequence:
        if self.formula is not None:
            return ValencySequence(formula=self.formula, offset=self.offset + 1)
        if self.prefix:
            return ValencySequence(self.prefix[1:], self.period)
        return ValencySequence((), self.period[1:] + self.period[:1])

    def doubled(self) -> ValencySequence:
        if self.formula is not None:
            raise ValueError("doubling is only defined for eventually periodic valencies")
        return ValencySequence([2 * x for x in self.prefix], [2 * x for x in self.period])

    def bound(self) -> int:
        if self.formula is not None:
            raise ValueError("formula valencies are not certified bounded")
        return max(self.prefix + self.period)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ValencySequence) and self.prefix == other.prefix
                and self.period == other.period and self.formula == other.formula
                and self.offset == other.offset)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ValencySequence({self.to_config()})"


class LevelData:
    """One level ``(a_2, ..., a_d) rho`` of a directed automorphism; rho fixes 1."""

    __slots__ = ("a", "rho", "_hash")

    def __init__(self, a: Sequence[Permutation], rho: Permutation):
        a = tuple(a)
        if len(a) != rho.d - 1:
            raise ValueError(f"expected {rho.d - 1} section labels, got {len(a)}")
        if rho(1) != 1:
            raise ValueError(f"rho must fix 1, got {rho}")
        if len({x.d for x in a}) > 1:
            raise ValueError("section labels must share a degree")
        self.a = a
        self.rho = rho
        self._hash = hash((a, rho))

    @property
    def d(self) -> int:
        return self.rho.d

    @property
    def next_d(self) -> int:
        return self.a[0].d

    def __mul__(self, other: LevelData) -> LevelData:
        rho = self.rho
        a = tuple(self.a[t - 2] * other.a[rho(t) - 2] for t in range(2, rho.d + 1))
        return LevelData(a, rho * other.rho)

    def inverse(self) -> LevelData:
        rinv = self.rho.inverse()
        a = tuple(self.a[rinv(s) - 2].inverse() for s in range(2, self.rho.d + 1))
        return LevelData(a, rinv)

    def is_identity(self) -> bool:
        return self.rho.is_identity() and all(x.is_identity() for x in self.a)

    def is_alternate(self) -> bool:
        return self.rho.is_even() and all(x.is_even() for x in self.a)

    def __eq__(self, other) -> bool:
        return isinstance(other, LevelData) and self.a == other.a and self.rho == other.rho

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"({', '.join(map(str, self.a))}; {self.rho})"


class DirectedSpec:
    """Directed automorphism ``h = (h_i)`` with eventually periodic level data.

    Under the wreath decomposition ``h = (shift(h), a_{0,2}, ..., a_{0,d_0}) rho_0``.
    """

    __slots__ = ("prefix", "period", "_hash", "_shift", "_inverse")

    def __init__(self, prefix: Iterable[LevelData] = (), period: Iterable[LevelData] = ()):
        prefix, period = tuple(prefix), tuple(period)
        if not period:
            raise ValueError("period must be nonempty")
        levels = prefix + period
        nxt = levels[1:] + period[:1]
        for lv, nx in zip(levels, nxt):
            if lv.next_d != nx.d:
                raise ValueError(f"degree chain broken: labels of degree {lv.next_d} above level of degree {nx.d}")
        self.prefix, self.period = _canonical(prefix, period)
        self._hash = hash((self.prefix, self.period))
        self._shift = None
        self._inverse = None

    @classmethod
    def constant(cls, a: Sequence[Permutation], rho: Permutation) -> DirectedSpec:
        return cls((), (LevelData(a, rho),))

    @classmethod
    def identity(cls, valency: ValencySequence) -> DirectedSpec:
        def lv(i):
            d, nd = valency.d(i), valency.d(i + 1)
            return LevelData([identity(nd)] * (d - 1), identity(d))
        n = len(valency.prefix)
        return cls([lv(i) for i in range(n)], [lv(n + i) for i in range(len(valency.period))])

    def level(self, i: int) -> LevelData:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    @property
    def d(self) -> int:
        return self.level(0).d

    @property
    def valency(self) -> ValencySequence:
        return ValencySequence([x.d for x in self.prefix], [x.d for x in self.period])

    def n_levels(self) -> int:
        """Number of levels that determine the whole sequence."""
        return len(self.prefix) + len(self.period)

    def shift(self) -> DirectedSpec:
        if self._shift is None:
            if self.prefix:
                self._shift = DirectedSpec(self.prefix[1:], self.period)
            else:
                self._shift = DirectedSpec((), self.period[1:] + self.period[:1])
        return self._shift

    def __mul__(self, other: DirectedSpec) -> DirectedSpec:
        p = max(len(self.prefix), len(other.prefix))
        n = math.lcm(len(self.period), len(other.period))
        levels = [self.level(i) * other.level(i) for i in range(p + n)]
        return DirectedSpec(levels[:p], levels[p:])

    def inverse(self) -> DirectedSpec:
        if self._inverse is None:
            self._inverse = DirectedSpec([x.inverse() for x in self.prefix],
                                         [x.inverse() for x in self.period])
        return self._inverse

    def is_identity(self) -> bool:
        return all(x.is_identity() for x in self.prefix + self.period)

    def is_alternate(self) -> bool:
        return all(x.is_alternate() for x in self.prefix + self.period)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DirectedSpec) and self._hash == other._hash
                and self.prefix == other.prefix and self.period == other.period)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        pre = " ".join(map(repr, self.prefix))
        per = " ".join(map(repr, self.period))
        return f"DirectedSpec([{pre}] ({per})*)"


Letter = Union[Permutation, DirectedSpec]


def _is_trivial(sym: Letter) -> bool:
    return sym.is_identity()


def _push(stack: list, sym: Letter) -> None:
    # adjacent letters of the same kind multiply inside A or inside the directed group
    if stack and type(stack[-1]) is type(sym):
        merged = stack.pop() * sym
        if not merged.is_identity():
            stack.append(merged)
    elif not sym.is_identity():
        stack.append(sym)


class GroupWord:
    """A word ``s_1^{e_1} ... s_n^{e_n}`` read left to right (``s_1`` acts first)."""

    __slots__ = ("letters", "valency", "_key")

    def __init__(self, letters: Iterable = (), valency: ValencySequence | None = None):
        norm = []
        for item in letters:
            if isinstance(item, (Permutation, DirectedSpec)):
                item = (item, 1)
            sym, e = item
            if e not in (1, -1):
                raise ValueError(f"exponent must be +-1, got {e}")
            norm.append((sym, e))
        if valency is None:
            valency = _infer_valency(s for s, _ in norm)
        for sym in {s for s, _ in norm}:
            if isinstance(sym, DirectedSpec):
                if sym.valency != valency:
                    raise ValueError(f"directed letter valency {sym.valency} does not match {valency}")
            elif sym.d != valency.d(0):
                raise ValueError(f"rooted letter of degree {sym.d} on a tree of root degree {valency.d(0)}")
        self.letters = tuple(norm)
        self.valency = valency
        self._key = None

    @classmethod
    def _from_key(cls, key: tuple, valency: ValencySequence) -> GroupWord:
        w = object.__new__(cls)
        w.letters = tuple((s, 1) for s in key)
        w.valency = valency
        w._key = key
        return w

    @classmethod
    def identity(cls, valency: ValencySequence | int) -> GroupWord:
        if isinstance(valency, int):
            valency = ValencySequence.constant(valency)
        return cls._from_key((), valency)

    @classmethod
    def of(cls, *symbols: Letter, valency: ValencySequence | None = None) -> GroupWord:
        return cls([(s, 1) for s in symbols], valency)

    @property
    def key(self) -> tuple:
        """Reduced letter sequence; equal keys imply equal elements."""
        if self._key is None:
            stack: list = []
            for sym, e in self.letters:
                _push(stack, sym if e == 1 else sym.inverse())
            self._key = tuple(stack)
        return self._key

    def reduced(self) -> GroupWord:
        return GroupWord._from_key(self.key, self.valency)

    def __mul__(self, other: GroupWord) -> GroupWord:
        if other.valency != self.valency:
            raise ValueError("words live on different trees")
        w = object.__new__(GroupWord)
        w.letters = self.letters + other.letters
        w.valency = self.valency
        w._key = None
        return w

    def inverse(self) -> GroupWord:
        w = object.__new__(GroupWord)
        w.letters = tuple((s, -e) for s, e in reversed(self.letters))
        w.valency = self.valency
        w._key = None
        return w

    def __pow__(self, n: int) -> GroupWord:
        base = self if n >= 0 else self.inverse()
        out = GroupWord.identity(self.valency)
        for _ in range(abs(n)):
            out = out * base
        return out

    def conj(self, by: GroupWord) -> GroupWord:
        """``by * self * by^-1``."""
        return by * self * by.inverse()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator:
        return iter(self.letters)

    def __repr__(self) -> str:
        return f"GroupWord(len={len(self.letters)}, reduced={len(self.key)})"


def _infer_valency(symbols: Iterable[Letter]) -> ValencySequence:
    rooted = None
    for s in symbols:
        if isinstance(s, DirectedSpec):
            return s.valency
        rooted = s
    if rooted is None:
        raise ValueError("cannot infer the tree of an empty word; pass valency")
    return ValencySequence.constant(rooted.d)


def commutator(x: GroupWord, y: GroupWord) -> GroupWord:
    """``x y x^-1 y^-1``."""
    return x * y * x.inverse() * y.inverse()


@dataclass(frozen=True)
class Decomposition:
    sections: tuple[GroupWord, ...]
    root: Permutation


@functools.lru_cache(maxsize=1 << 18)
def _decompose(key: tuple, valency: ValencySequence) -> tuple[tuple[tuple, ...], Permutation]:
    d = valency.d(0)
    stacks: list[list] = [[] for _ in range(d)]
    root = identity(d)
    for sym in key:
        if isinstance(sym, Permutation):
            root = root * sym
            continue
        lv = sym.level(0)
        inner = sym.shift()
        images = root.images
        for t in range(d):
            s = images[t]
            _push(stacks[t], inner if s == 1 else lv.a[s - 2])
        root = root * lv.rho
    return tuple(tuple(st) for st in stacks), root


def decompose(w: GroupWord) -> Decomposition:
    secs, root = _decompose(w.key, w.valency)
    sub = w.valency.shift()
    return Decomposition(tuple(GroupWord._from_key(s, sub) for s in secs), root)


def _check_vertex(valency: ValencySequence, v: Sequence[int]) -> None:
    for i, t in enumerate(v):
        if not 1 <= t <= valency.d(i):
            raise ValueError(f"coordinate {t} out of range 1..{valency.d(i)} at depth {i}")


def act(w: GroupWord, v: Sequence[int]) -> tuple[int, ...]:
    """Image of the vertex ``v`` (a tuple of 1-based coordinates)."""
    v = tuple(v)
    _check_vertex(w.valency, v)
    key, val = w.key, w.valency
    out = []
    for i, t in enumerate(v):
        if not key:
            out.extend(v[i:])
            break
        secs, root = _decompose(key, val)
        out.append(root(t))
        key, val = secs[t - 1], val.shift()
    return tuple(out)


def section(w: GroupWord, v: Sequence[int]) -> GroupWord:
    """The section ``w_v`` below vertex ``v``."""
    v = tuple(v)
    _check_vertex(w.valency, v)
    key, val = w.key, w.valency
    for t in v:
        if key:
            key = _decompose(key, val)[0][t - 1]
        val = val.shift()
    return GroupWord._from_key(key, val)


def is_identity(w: GroupWord) -> bool:
    """Decide triviality by exploring sections until no new word appears.

    Sections of a reduced word are never longer than the word and letters come
    from a finite alphabet, so the visited set is finite.
    """
    start = (w.key, w.valency)
    seen = {start}
    pending = [start]
    while pending:
        key, val = pending.pop()
        if not key:
            continue
        secs, root = _decompose(key, val)
        if not root.is_identity():
            return False
        sub = val.shift()
        for s in secs:
            item = (s, sub)
            if item not in seen:
                seen.add(item)
                pending.append(item)
    return True


def equal(x: GroupWord, y: GroupWord) -> bool:
    return is_identity(x * y.inverse())


def level_size(valency: ValencySequence, j: int) -> int:
    return math.prod(valency.take(j))


@functools.lru_cache(maxsize=1 << 16)
def _level_images(key: tuple, valency: ValencySequence, j: int) -> tuple[int, ...]:
    m = level_size(valency.shift(), j - 1) if j > 0 else 1
    if j == 0:
        return (0,)
    d = valency.d(0)
    if not key:
        return tuple(range(d * m))
    secs, root = _decompose(key, valency)
    sub = valency.shift()
    out = [0] * (d * m)
    for t in range(d):
        base = (root.images[t] - 1) * m
        img = _level_images(secs[t], sub, j - 1)
        off = t * m
        for r in range(m):
            out[off + r] = base + img[r]
    return tuple(out)


def level_permutation(w: GroupWord, j: int, max_degree: int = DEFAULT_MAX_DEGREE) -> Permutation:
    """Permutation induced on level ``j``, vertices in lexicographic order."""
    if j < 1:
        raise ValueError("level index must be >= 1")
    n = level_size(w.valency, j)
    if n > max_degree:
        raise ResourceLimitError(f"level {j} has {n} vertices (bound {max_degree})")
    return Permutation._trusted(tuple(x + 1 for x in _level_images(w.key, w.valency, j)))


def vertex_index(valency: ValencySequence, v: Sequence[int]) -> int:
    """0-based lexicographic index of ``v`` on its level (t_0 most significant)."""
    idx = 0
    for i, t in enumerate(v):
        idx = idx * valency.d(i) + (t - 1)
    return idx


def level_vertices(valency: ValencySequence, j: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(*[range(1, valency.d(i) + 1) for i in range(j)])


@dataclass
class Portrait:
    """Labels ``sigma_v`` for the vertices of depth < ``depth``."""

    valency: ValencySequence
    depth: int
    labels: dict = field(default_factory=dict)

    def label(self, v: Sequence[int]) -> Permutation:
        v = tuple(v)
        lab = self.labels.get(v)
        return lab if lab is not None else identity(self.valency.d(len(v)))

    def nontrivial(self) -> dict:
        return {v: p for v, p in self.labels.items() if not p.is_identity()}

    def is_trivial(self) -> bool:
        return not self.nontrivial()

    def is_alternate(self) -> bool:
        return all(p.is_even() for p in self.labels.values())

    def is_directed(self) -> bool:
        for v, p in self.nontrivial().items():
            if all(t == 1 for t in v):
                if p(1) != 1:
                    return False
            elif not (all(t == 1 for t in v[:-1]) and v[-1] != 1):
                return False
        return True

    def act(self, v: Sequence[int]) -> tuple[int, ...]:
        v = tuple(v)
        if len(v) > self.depth:
            raise ValueError(f"portrait of depth {self.depth} cannot act on depth {len(v)}")
        _check_vertex(self.valency, v)
        return tuple(self.label(v[:i])(v[i]) for i in range(len(v)))

    def level_permutation(self, j: int, max_degree: int = DEFAULT_MAX_DEGREE) -> Permutation:
        if not 1 <= j <= self.depth:
            raise ValueError(f"level {j} outside portrait depth {self.depth}")
        n = level_size(self.valency, j)
        if n > max_degree:
            raise ResourceLimitError(f"level {j} has {n} vertices (bound {max_degree})")
        images = [0] * n
        for v in level_vertices(self.valency, j):
            images[vertex_index(self.valency, v)] = vertex_index(self.valency, self.act(v)) + 1
        return Permutation._trusted(tuple(images))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Portrait) and self.valency == other.valency
                and self.depth == other.depth and self.nontrivial() == other.nontrivial())


def portrait(w: GroupWord, depth: int) -> Portrait:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    labels = {}
    frontier = [((), w.key)]
    val = w.valency
    for lvl in range(depth):
        nxt = []
        d = val.d(0)
        for v, key in frontier:
            if key:
                secs, root = _decompose(key, val)
            else:
                secs, root = ((),) * d, identity(d)
            labels[v] = root
            nxt.extend((v + (t,), secs[t - 1]) for t in range(1, d + 1))
        frontier = nxt
        val = val.shift()
    return Portrait(w.valency, depth, labels)


def parse_word(text: str, table: dict, valency: ValencySequence | None = None) -> GroupWord:
    """Parse whitespace-separated generator names, each optionally suffixed ``^-1``."""
    letters = []
    for tok in text.split():
        name, e = tok, 1
        if tok.endswith("^-1"):
            name, e = tok[:-3], -1
        elif tok.endswith("^1"):
            name = tok[:-2]
        if name not in table:
            raise ValueError(f"unknown generator {name!r}")
        letters.append((table[name], e))
    if not letters and valency is None:
        raise ValueError("empty word needs an explicit valency")
    return GroupWord(letters, valency)


def format_word(w: GroupWord, names: dict) -> str:
    out = []
    for sym, e in w.letters:
        name = names[sym]
        out.append(name if e == 1 else f"{name}^-1")
    return " ".join(out)
