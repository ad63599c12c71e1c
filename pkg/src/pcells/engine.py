"""Dense integer engine for actions on KL and p-canonical coordinates.

Columns of a :class:`Block` are independent vectors; ``data[y, j, k]`` is
the coefficient of ``v^(lo + k)`` on basis element ``y`` in column ``j``.

Multiplication by a generator never leaves the KL basis: with ``mu(z, y)``
the coefficient of ``v`` in ``h_{z,y}``,

* ``b_s b_y = (v + v^-1) b_y`` when ``sy < y``,
* ``b_s b_y = b_{sy} + sum_{z < y, sz < z} mu(z, y) b_z`` otherwise,

and ``H_s = b_s - v``.  Right multiplication is the mirror image.  So each
generator is one sparse integer matrix plus two shifted copies, which is
what keeps F4 at desk scale.

Coefficients are int64; every step checks a bound on coefficient growth and
raises :class:`OverflowError` rather than wrap.
"""

from __future__ import annotations

import threading
import weakref
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .coxeter import CoxeterSystem
from .hecke import KLTable, PartialTableError, kl_table
from .laurent import LaurentPoly

_LIMIT = 1 << 62


class Block:
    __slots__ = ("data", "lo")

    def __init__(self, data: np.ndarray, lo: int = 0):
        self.data = data
        self.lo = int(lo)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int, lo: int = 0, width: int = 1) -> "Block":
        return cls(np.zeros((n_rows, n_cols, width), dtype=np.int64), lo)

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def copy(self) -> "Block":
        return Block(self.data.copy(), self.lo)

    def exponent_range(self) -> Optional[tuple[int, int]]:
        ks = np.flatnonzero(self.data.any(axis=(0, 1)))
        if len(ks) == 0:
            return None
        return self.lo + int(ks[0]), self.lo + int(ks[-1])

    def padded(self, below: int, above: int) -> "Block":
        if below <= 0 and above <= 0:
            return self
        below, above = max(below, 0), max(above, 0)
        d = np.pad(self.data, ((0, 0), (0, 0), (below, above)))
        return Block(d, self.lo - below)

    def room(self, below: int, above: int) -> "Block":
        """Guarantee ``below``/``above`` zero exponent slots at each end."""
        ks = np.flatnonzero(self.data.any(axis=(0, 1)))
        if len(ks) == 0:
            return self
        need_lo = below - int(ks[0])
        need_hi = above - (self.width - 1 - int(ks[-1]))
        if need_lo > 0 or need_hi > 0:
            return self.padded(need_lo + 4 if need_lo > 0 else 0, need_hi + 4 if need_hi > 0 else 0)
        return self

    def trimmed(self) -> "Block":
        ks = np.flatnonzero(self.data.any(axis=(0, 1)))
        if len(ks) == 0:
            return Block(self.data[:, :, :1] * 0, 0)
        return Block(self.data[:, :, ks[0]:ks[-1] + 1].copy(), self.lo + int(ks[0]))

    def aligned_with(self, other: "Block") -> tuple[np.ndarray, np.ndarray, int]:
        lo = min(self.lo, other.lo)
        hi = max(self.lo + self.width, other.lo + other.width)
        a = self.padded(self.lo - lo, hi - self.lo - self.width).data
        b = other.padded(other.lo - lo, hi - other.lo - other.width).data
        return a, b, lo

    def __add__(self, other: "Block") -> "Block":
        a, b, lo = self.aligned_with(other)
        return Block(a + b, lo)

    def __sub__(self, other: "Block") -> "Block":
        a, b, lo = self.aligned_with(other)
        return Block(a - b, lo)

    def poly(self, row: int, col: int) -> LaurentPoly:
        r = self.data[row, col]
        return LaurentPoly._raw({self.lo + int(k): int(r[k]) for k in np.flatnonzero(r)})

    def support(self, col: int) -> np.ndarray:
        return np.flatnonzero(self.data[:, col, :].any(axis=1))

    def column(self, col: int) -> dict[int, LaurentPoly]:
        return {int(y): self.poly(y, col) for y in self.support(col)}

    def max_abs(self) -> int:
        return int(np.abs(self.data).max()) if self.data.size else 0


def _guard(m: int, factor: int) -> None:
    if m and m * factor >= _LIMIT:
        raise OverflowError("coefficient growth would exceed the int64 range")


def _shift_add(dst: np.ndarray, src: np.ndarray, e: int, c: int) -> None:
    """``dst += c * v^e * src`` along the last axis (caller ensures room)."""
    if e == 0:
        dst += c * src
    elif e > 0:
        dst[..., e:] += c * src[..., :-e]
    else:
        dst[..., :e] += c * src[..., -e:]


def poly_terms(f: LaurentPoly) -> list[tuple[int, int]]:
    return list(f.items())


class Engine:
    """Generator actions for one group and one basis table (``None`` = KL)."""

    def __init__(self, W: CoxeterSystem, table=None, kl: Optional[KLTable] = None):
        self.W = W
        self.kl = kl or kl_table(W)
        self.table = table
        self.N = W.order
        self._ops = {}
        self._build_ops()
        self._compile_table()
        self._children = None

    # -- operators -----------------------------------------------------------

    def _build_ops(self) -> None:
        W = self.W
        N = self.N
        zs, ws, ms = self.kl.mu_triples()
        for side in ("left", "right"):
            desc = W.left_descent_table if side == "left" else W.right_descent_table
            mult = W.lmul_table if side == "left" else W.rmul_table
            for s in range(len(W.generators())):
                up = np.flatnonzero(~desc[:, s])
                keep = desc[zs, s] & ~desc[ws, s]
                rows = np.concatenate([mult[s, up], zs[keep]])
                cols = np.concatenate([up, ws[keep]])
                vals = np.concatenate([np.ones(len(up), dtype=np.int64), ms[keep]])
                C = sp.csr_matrix((vals, (rows, cols)), shape=(N, N), dtype=np.int64)
                bound = int(np.abs(C).sum(axis=0).max()) + 2
                self._ops[side, s] = (C, desc[:, s].copy(), bound)

    def step(self, X: Block, s: int, side: str = "left", kind: str = "H") -> Block:
        """Multiply every column by ``H_s`` (``kind="H"``) or ``b_s`` (``"b"``).

        ``s`` is 0-based here.
        """
        C, desc, bound = self._ops[side, s]
        X = X.room(1, 1)
        _guard(X.max_abs(), bound)
        shape = X.data.shape
        Y = (C @ X.data.reshape(shape[0], -1)).reshape(shape)
        x = X.data
        if kind == "b":
            Y[desc, :, 1:] += x[desc, :, :-1]
            Y[desc, :, :-1] += x[desc, :, 1:]
        elif kind == "H":
            asc = ~desc
            Y[asc, :, 1:] -= x[asc, :, :-1]
            Y[desc, :, :-1] += x[desc, :, 1:]
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
        return Block(Y, X.lo)

    def apply_word(self, X: Block, word: Sequence[int], side: str = "left", kind: str = "H") -> Block:
        """Left: ``T_{s1}...T_{sk} X``; right: ``X T_{s1}...T_{sk}`` (1-based letters)."""
        letters = reversed(word) if side == "left" else word
        for s in letters:
            X = self.step(X, s - 1, side, kind)
        return X

    def half(self, X: Block) -> Block:
        """``H_{w0} X`` on KL coordinates."""
        return self.apply_word(X, self.W.longest().word, "left", "H")

    # -- p-canonical conversion ----------------------------------------------

    def _compile_table(self) -> None:
        self._cols = []
        self._span = 0
        if self.table is None:
            return
        for z, col in sorted(self.table.nontrivial().items()):
            terms = []
            for x, f in sorted(col.items()):
                if x == z:
                    continue
                ts = poly_terms(f)
                terms.append((x, ts))
                self._span = max(self._span, max(abs(e) for e, _ in ts))
            self._cols.append((z, terms))
        self._coef_bound = 1 + sum(abs(c) for _, terms in self._cols for _, ts in terms for _, c in ts)

    @property
    def identity_basis(self) -> bool:
        return not self._cols

    def domain(self) -> Optional[frozenset]:
        return None if self.table is None else self.table.domain_indices

    def check_domain(self, rows: Iterable[int]) -> None:
        dom = self.domain()
        if dom is None:
            return
        missing = [str(self.W[int(y)]) for y in rows if int(y) not in dom]
        if missing:
            raise PartialTableError(missing)

    def to_kl(self, X: Block) -> Block:
        """p-canonical coordinates to KL coordinates."""
        if not self._cols:
            return X
        self.check_domain(np.flatnonzero(X.data.any(axis=(1, 2))))
        X = X.room(self._span, self._span)
        _guard(X.max_abs(), self._coef_bound)
        Y = X.data.copy()
        for z, terms in self._cols:
            a = X.data[z]
            if not a.any():
                continue
            for x, ts in terms:
                for e, c in ts:
                    _shift_add(Y[x], a, e, c)
        return Block(Y, X.lo)

    def from_kl(self, X: Block) -> Block:
        """KL coordinates to p-canonical coordinates (unitriangular solve)."""
        if self._cols:
            X = X.room(self._span, self._span).copy()
            Y = X.data
            span = self._span
            for z, terms in reversed(self._cols):
                a = Y[z]
                if not a.any():
                    continue
                if a[:, :span].any() or a[:, Y.shape[2] - span:].any():
                    X = X.padded(span + 4, span + 4)
                    Y = X.data
                    a = Y[z]
                a = a.copy()
                _guard(int(np.abs(a).max()), self._coef_bound)
                for x, ts in terms:
                    for e, c in ts:
                        _shift_add(Y[x], a, e, -c)
        self.check_domain(np.flatnonzero(X.data.any(axis=(1, 2))))
        return X

    def unit(self, cols: Sequence[int]) -> Block:
        """Basis vectors ``e_w`` for ``w`` in ``cols``."""
        X = Block.zeros(self.N, len(cols))
        X.data[np.asarray(cols, dtype=np.int64), np.arange(len(cols)), 0] = 1
        return X

    def kl_of(self, cols: Sequence[int]) -> Block:
        """``c_w`` in KL coordinates."""
        self.check_domain(cols)
        return self.to_kl(self.unit(cols))

    def std_of(self, cols: Sequence[int]) -> Block:
        """``c_w`` in standard coordinates."""
        X = self.kl_of(cols)
        rng = X.exponent_range() or (0, 0)
        D = self.W.longest().length + 1
        lo = rng[0]
        out = np.zeros((self.N, len(cols), rng[1] - lo + D), dtype=np.int64)
        for j in range(len(cols)):
            for z in X.support(j):
                idx, co = self.kl.rows[z]
                r = X.data[z, j]
                for k in np.flatnonzero(r):
                    off = X.lo + int(k) - lo
                    out[idx, j, off:off + D] += int(r[k]) * co
        return Block(out, lo)

    # -- products --------------------------------------------------------------

    def gen_product(self, X: Block, s: int, side: str) -> Block:
        """``c_s X`` (left) or ``X c_s`` (right) on KL coordinates; ``s`` 0-based."""
        Y = self.step(X, s, side, "b")
        if self.table is None:
            return Y
        col = self.table.kl_column(s + 1)
        W = self.W
        gen = W.generator(s + 1).index
        for x, f in col.items():
            if x == gen:
                continue
            if x != 0:
                raise ValueError("generator column supported outside {e, s}")
            Z = X.room(self._span, self._span)
            acc = np.zeros_like(Z.data)
            for e, c in f.items():
                _shift_add(acc, Z.data, e, c)
            Y = Y + Block(acc, Z.lo)
        return Y

    def _trie(self):
        if self._children is None:
            W = self.W
            children = [[] for _ in range(self.N)]
            for u in range(1, self.N):
                word = W.word_of(u)
                children[W.index_of(word[:-1])].append((u, word[-1] - 1))
            self._children = children
        return self._children

    def product(self, K: Block, X: Block) -> Block:
        """``sum_u K[u] H_u X`` column by column.

        ``K`` holds standard coordinates of the left factors and ``X`` the
        KL coordinates of the right factors.  Walks the prefix trie of
        canonical words: ``V_u = K_u X + sum_s H_s V_{us}``.
        """
        children = self._trie()
        nz = K.data.any(axis=2)  # (N, B)
        live = nz.any(axis=1).copy()
        for u in range(self.N - 1, -1, -1):
            for c, _ in children[u]:
                live[u] |= live[c]

        def scaled(u: int) -> Optional[Block]:
            if not nz[u].any():
                return None
            k = K.data[u]  # (B, DK)
            Z = X.padded(0, K.width - 1)
            acc = np.zeros_like(Z.data)
            for j in np.flatnonzero(k.any(axis=0)):
                coef = k[:, j]
                _guard(X.max_abs() * int(np.abs(coef).max()), K.width)
                acc[:, :, j:] += coef[None, :, None] * Z.data[:, :, :Z.width - j]
            return Block(acc, X.lo + K.lo)

        def visit(u: int) -> Optional[Block]:
            total = scaled(u)
            for c, s in children[u]:
                if not live[c]:
                    continue
                V = visit(c)
                if V is None:
                    continue
                V = self.step(V, s, "left", "H")
                total = V if total is None else total + V
            return total

        out = visit(0) if live[0] else None
        if out is None:
            return Block.zeros(self.N, X.data.shape[1])
        return out.trimmed()

    def multiply(self, left: Sequence[int], right: Sequence[int]) -> Block:
        """``c_x c_y`` for paired columns, in p-canonical coordinates."""
        K = self.std_of(left)
        X = self.kl_of(right)
        return self.from_kl(self.product(K, X))


_ENGINES: dict = {}
_LOCK = threading.Lock()


def engine_for(W: CoxeterSystem, table=None) -> Engine:
    """Shared engine per (group, table); the identity table maps to plain KL."""
    if table is not None and not table.nontrivial() and table.complete:
        table = None
    key = (id(W), id(table))
    with _LOCK:
        hit = _ENGINES.get(key)
        if hit is not None and hit[0]() is W and (table is None or hit[1]() is table):
            return hit[2]
    eng = Engine(W, table)
    with _LOCK:
        _ENGINES[key] = (weakref.ref(W), weakref.ref(table) if table is not None else (lambda: None), eng)
    return eng
