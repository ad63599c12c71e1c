"""Finite Weyl groups with ShortLex-canonical elements.

Generators are numbered 1..n following the usual Dynkin numbering
(B_n/C_n with the double bond between n-1 and n, D_n with the fork at
n-2, F_4 long roots 1,2, E_n with 2 attached to 4).

Elements are enumerated by a breadth-first search on the orbit of a
regular dominant weight.  Each element gets an index in the order
(length, ShortLex of its canonical word); all bulk machinery works on these
indices, and :class:`Element` wraps an index for the public API.

>>> W = build("C2")
>>> W.order, W.longest().length
(8, 4)
>>> W.element("212")
Element('212')
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class CoxeterError(ValueError):
    pass


_LABEL = re.compile(r"^\s*([ABCDEFG])_?(\d+)\s*$")
SUPPORTED = "ABCDEFG"
DESK_SCALE_RANK = 4


@dataclass(frozen=True)
class CartanSpec:
    family: str
    rank: int

    def __post_init__(self):
        f, n = self.family, self.rank
        if f not in SUPPORTED:
            raise CoxeterError(f"unsupported type {f}{n}")
        ok = {
            "A": n >= 1,
            "B": n >= 2,
            "C": n >= 2,
            "D": n >= 4,
            "E": n in (6, 7, 8),
            "F": n == 4,
            "G": n == 2,
        }[f]
        if not ok:
            raise CoxeterError(f"unsupported type {f}{n}")

    @classmethod
    def parse(cls, label: str) -> "CartanSpec":
        m = _LABEL.match(label.upper())
        if not m:
            raise CoxeterError(f"cannot parse Cartan type {label!r}")
        return cls(m.group(1), int(m.group(2)))

    @property
    def label(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def desk_scale(self) -> bool:
        return self.rank <= DESK_SCALE_RANK

    def __str__(self) -> str:
        return self.label

    def cartan_matrix(self) -> np.ndarray:
        """``A[i, j] = <alpha_i^vee, alpha_j>`` (0-based indices)."""
        f, n = self.family, self.rank
        A = 2 * np.eye(n, dtype=np.int64)

        def bond(i, j, a_ij=-1, a_ji=-1):
            A[i - 1, j - 1] = a_ij
            A[j - 1, i - 1] = a_ji

        if f in "ABC":
            for i in range(1, n - 1):
                bond(i, i + 1)
            if n >= 2:
                if f == "A":
                    bond(n - 1, n)
                elif f == "B":
                    # alpha_n short
                    bond(n - 1, n, a_ij=-1, a_ji=-2)
                else:
                    # alpha_n long
                    bond(n - 1, n, a_ij=-2, a_ji=-1)
        elif f == "D":
            for i in range(1, n - 1):
                bond(i, i + 1)
            A[n - 2, n - 1] = A[n - 1, n - 2] = 0
            bond(n - 2, n)
        elif f == "E":
            bond(1, 3)
            bond(2, 4)
            for i in range(3, n):
                bond(i, i + 1)
        elif f == "F":
            bond(1, 2)
            bond(2, 3, a_ij=-1, a_ji=-2)
            bond(3, 4)
        elif f == "G":
            bond(1, 2, a_ij=-1, a_ji=-3)
        return A


_M_FROM_PRODUCT = {0: 2, 1: 3, 2: 4, 3: 6}


@dataclass(frozen=True, eq=False)
class Element:
    """A group element; identity is its canonical (ShortLex-least reduced) word."""

    system: "CoxeterSystem" = field(repr=False)
    index: int

    @property
    def word(self) -> tuple[int, ...]:
        return self.system._words[self.index]

    @property
    def length(self) -> int:
        return int(self.system._length[self.index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.system is other.system and self.index == other.index

    def __hash__(self) -> int:
        return hash((id(self.system), self.index))

    def __lt__(self, other: "Element") -> bool:
        self.system._check(other)
        return self.index < other.index

    def __le__(self, other: "Element") -> bool:
        self.system._check(other)
        return self.index <= other.index

    def __mul__(self, other: "Element") -> "Element":
        return self.system.mul(self, other)

    def inverse(self) -> "Element":
        return self.system.inverse(self)

    def is_involution(self) -> bool:
        return self.system.inverse(self) == self

    def __str__(self) -> str:
        return self.system.format_word(self.word)

    def __repr__(self) -> str:
        return f"Element({str(self)!r})"


class CoxeterSystem:
    """A finite Weyl group.  Immutable once built; enumeration is lazy."""

    def __init__(self, spec: CartanSpec):
        self.spec = spec
        self.rank = spec.rank
        self.cartan = spec.cartan_matrix()
        n = self.rank
        self.coxeter_matrix = np.ones((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                if i != j:
                    prod = int(self.cartan[i, j] * self.cartan[j, i])
                    self.coxeter_matrix[i, j] = _M_FROM_PRODUCT[prod]
        self.positive_roots = self._positive_roots()
        self._lock = threading.Lock()
        self._built = False

    def __repr__(self) -> str:
        return f"CoxeterSystem({self.spec.label})"

    @property
    def label(self) -> str:
        return self.spec.label

    def _positive_roots(self) -> list[tuple[int, ...]]:
        n = self.rank
        A = self.cartan
        simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        seen = set(simple)
        frontier = list(simple)
        while frontier:
            nxt = []
            for beta in frontier:
                b = np.array(beta)
                for i in range(n):
                    pairing = int(A[i] @ b)
                    gamma = b.copy()
                    gamma[i] -= pairing
                    g = tuple(int(x) for x in gamma)
                    if all(x >= 0 for x in g) and g not in seen:
                        seen.add(g)
                        nxt.append(g)
            frontier = nxt
        return sorted(seen, key=lambda r: (sum(r), r))

    # -- enumeration --------------------------------------------------------

    def _ensure(self) -> None:
        if self._built:
            return
        with self._lock:
            if not self._built:
                self._enumerate()
                self._built = True

    def _enumerate(self) -> None:
        n = self.rank
        A = self.cartan
        rho = tuple([1] * n)
        words: list[tuple[int, ...]] = [()]
        vecs: list[tuple[int, ...]] = [rho]
        lengths = [0]
        index_of = {rho: 0}
        level = [0]
        while level:
            found: dict[tuple[int, ...], tuple[int, ...]] = {}
            for w in level:
                lam = vecs[w]
                for j in range(n):
                    if lam[j] > 0:
                        new = tuple(lam[i] - lam[j] * int(A[i, j]) for i in range(n))
                        if new in found:
                            continue
                        # canonical word: smallest left descent, then the rest
                        s = next(i for i in range(n) if new[i] < 0)
                        prev = tuple(new[i] - new[s] * int(A[i, s]) for i in range(n))
                        found[new] = (s + 1,) + words[index_of[prev]]
            level = []
            for v, wd in sorted(found.items(), key=lambda kv: kv[1]):
                index_of[v] = len(words)
                level.append(len(words))
                words.append(wd)
                vecs.append(v)
                lengths.append(len(wd))
        N = len(words)
        self._words = words
        self._index_of_word = {w: i for i, w in enumerate(words)}
        self._length = np.array(lengths, dtype=np.int64)
        vec_arr = np.array(vecs, dtype=np.int64)
        self._vec = vec_arr
        # left multiplication s_j * w acts on w(rho)
        lmul = np.empty((n, N), dtype=np.int64)
        for j in range(n):
            new = vec_arr - vec_arr[:, [j]] * A[:, j][None, :]
            lmul[j] = [index_of[tuple(r)] for r in new.tolist()]
        self._lmul = lmul
        self._ldesc = vec_arr < 0  # (N, n) left descent table
        inv = np.empty(N, dtype=np.int64)
        for w in range(N):
            x = 0
            for s in words[w]:
                x = lmul[s - 1, x]
            inv[w] = x
        self._inv = inv
        self._rmul = inv[lmul[:, inv]]
        self._rdesc = self._ldesc[inv]
        self._w0 = N - 1

    # -- index-level API (used by the bulk algorithms) -----------------------

    @property
    def order(self) -> int:
        self._ensure()
        return len(self._words)

    @property
    def lmul_table(self) -> np.ndarray:
        self._ensure()
        return self._lmul

    @property
    def rmul_table(self) -> np.ndarray:
        self._ensure()
        return self._rmul

    @property
    def lengths(self) -> np.ndarray:
        self._ensure()
        return self._length

    @property
    def inverse_table(self) -> np.ndarray:
        self._ensure()
        return self._inv

    @property
    def left_descent_table(self) -> np.ndarray:
        self._ensure()
        return self._ldesc

    @property
    def right_descent_table(self) -> np.ndarray:
        self._ensure()
        return self._rdesc

    def words(self) -> list[tuple[int, ...]]:
        self._ensure()
        return self._words

    def word_of(self, index: int) -> tuple[int, ...]:
        self._ensure()
        return self._words[index]

    def index_of(self, word: Sequence[int]) -> int:
        """Index of the product of ``word`` (need not be reduced)."""
        self._ensure()
        x = 0
        for s in reversed(tuple(word)):
            if not 1 <= s <= self.rank:
                raise CoxeterError(f"generator {s} out of range 1..{self.rank}")
            x = int(self._lmul[s - 1, x])
        return x

    def mul_index(self, a: int, b: int) -> int:
        x = b
        for s in reversed(self._words[a]):
            x = int(self._lmul[s - 1, x])
        return x

    # -- element API --------------------------------------------------------

    def _check(self, *elts: Element) -> None:
        for e in elts:
            if e.system is not self:
                raise CoxeterError("elements belong to different Coxeter systems")

    def __getitem__(self, index: int) -> Element:
        self._ensure()
        if not 0 <= index < len(self._words):
            raise IndexError(index)
        return Element(self, int(index))

    def identity(self) -> Element:
        return self[0]

    def generator(self, s: int) -> Element:
        return self[self.index_of((s,))]

    def generators(self) -> list[Element]:
        return [self.generator(s) for s in range(1, self.rank + 1)]

    def parse_word(self, text: str | Sequence[int]) -> tuple[int, ...]:
        if not isinstance(text, str):
            return tuple(int(s) for s in text)
        t = text.strip()
        if t in ("", "e", "id"):
            return ()
        if self.rank <= 9:
            if not t.isdigit():
                raise CoxeterError(f"malformed word {text!r}")
            return tuple(int(c) for c in t)
        return tuple(int(c) for c in t.replace(" ", "").split(","))

    def format_word(self, word: Sequence[int]) -> str:
        if not word:
            return "e"
        if self.rank <= 9:
            return "".join(str(s) for s in word)
        return ",".join(str(s) for s in word)

    def canonicalize(self, word: str | Sequence[int]) -> Element:
        return self[self.index_of(self.parse_word(word))]

    element = canonicalize

    def mul(self, a: Element, b: Element) -> Element:
        self._check(a, b)
        return self[self.mul_index(a.index, b.index)]

    def inverse(self, a: Element) -> Element:
        self._check(a)
        return self[int(self._inv[a.index])]

    def length(self, a: Element) -> int:
        return a.length

    def descents(self, a: Element, side: str = "left") -> frozenset[int]:
        self._check(a)
        table = self._ldesc if side == "left" else self._rdesc
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', not {side!r}")
        return frozenset(int(i) + 1 for i in np.flatnonzero(table[a.index]))

    def longest(self) -> Element:
        self._ensure()
        return self[self._w0]

    def w0_translate(self, w: Element) -> Element:
        return self.mul(self.longest(), w)

    def enumerate(self) -> list[Element]:
        self._ensure()
        return [Element(self, i) for i in range(len(self._words))]

    __iter__ = lambda self: iter(self.enumerate())

    def __len__(self) -> int:
        return self.order

    # -- Bruhat order -------------------------------------------------------

    def bruhat_leq_index(self, x: int, w: int) -> bool:
        # lifting property: for s a left descent of w, x <= w iff min(x, sx) <= sw
        self._ensure()
        while True:
            if self._length[x] > self._length[w]:
                return False
            if w == 0:
                return x == 0
            s = self._words[w][0] - 1
            sx = int(self._lmul[s, x])
            if sx < x and self._length[sx] < self._length[x]:
                x = sx
            w = int(self._lmul[s, w])

    def bruhat_leq(self, a: Element, b: Element) -> bool:
        self._check(a, b)
        return self.bruhat_leq_index(a.index, b.index)

    def bruhat_matrix(self) -> np.ndarray:
        """Boolean matrix ``B[x, w] = (x <= w)``; quadratic memory."""
        self._ensure()
        N = self.order
        below = np.zeros((N, N), dtype=bool)
        below[0, 0] = True
        for w in range(1, N):
            s = self._words[w][0] - 1
            sw = int(self._lmul[s, w])
            prev = below[:, sw]
            below[:, w] = prev | prev[self._lmul[s]]
        return below


_CACHE: dict[str, CoxeterSystem] = {}
_CACHE_LOCK = threading.Lock()


def build(spec: CartanSpec | str) -> CoxeterSystem:
    """Return the (shared, immutable) Coxeter system of a Cartan type."""
    if isinstance(spec, str):
        spec = CartanSpec.parse(spec)
    with _CACHE_LOCK:
        W = _CACHE.get(spec.label)
        if W is None:
            W = _CACHE[spec.label] = CoxeterSystem(spec)
    return W


def words_to_elements(W: CoxeterSystem, words: Iterable[str]) -> list[Element]:
    return [W.element(w) for w in words]
