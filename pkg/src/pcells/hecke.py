"""Iwahori-Hecke algebra over Z[v, v^-1].

Normalization: ``H_s^2 = 1 + (v^-1 - v) H_s`` and ``b_s = H_s + v``, so the
Kazhdan-Lusztig basis is ``b_w = H_w + sum_{x<w} h_{x,w} H_x`` with
``h_{x,w}`` in ``v Z[v]``.

Two layers live here:

* :class:`HeckeElt`, exact sparse elements keyed by :class:`Element` with
  :class:`LaurentPoly` coefficients.  Used for anything user facing and as
  the slow, independent route in tests.
* :class:`KLTable`, the KL basis of a whole group, built with dense integer
  rows (one row per element, columns are exponents 0..l(w0)).
"""

from __future__ import annotations

import hashlib
import weakref
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from . import __version__
from .coxeter import CoxeterSystem, Element, build
from .laurent import ONE, V, V_INV, ZERO, LaurentPoly, parse as parse_poly


class HeckeError(ValueError):
    pass


class PartialTableError(HeckeError):
    """A computation needed basis elements outside a partial table's domain."""

    def __init__(self, missing: Iterable[str], what: str = "p-canonical table"):
        self.missing = sorted(set(missing), key=lambda w: (len(w) if w != "e" else 0, w))
        shown = ", ".join(self.missing[:20]) + (" ..." if len(self.missing) > 20 else "")
        super().__init__(f"partial table: {what} lacks {len(self.missing)} element(s): {shown}")


class CacheError(HeckeError):
    pass


@dataclass(frozen=True)
class BasisTag:
    kind: str  # "std", "kl" or "pcan"
    p: int = 0
    table_id: Optional[str] = None

    def __str__(self) -> str:
        if self.kind == "pcan":
            return f"PCan(p={self.p}, {self.table_id})"
        return {"std": "Standard", "kl": "KL"}[self.kind]


STANDARD = BasisTag("std")
KL = BasisTag("kl")


class HeckeElt:
    """An immutable sparse element ``sum f_w X_w`` in a named basis ``X``."""

    __slots__ = ("system", "basis", "_coeffs")

    def __init__(self, system: CoxeterSystem, coeffs: Mapping[Element, LaurentPoly] = (),
                 basis: BasisTag = STANDARD):
        self.system = system
        self.basis = basis
        clean = {}
        for w, f in dict(coeffs).items():
            if w.system is not system:
                raise HeckeError("element from a different Coxeter system")
            f = LaurentPoly._coerce(f)
            if f:
                clean[w] = f
        self._coeffs = clean

    @classmethod
    def _raw(cls, system, coeffs, basis):
        obj = cls.__new__(cls)
        obj.system = system
        obj.basis = basis
        obj._coeffs = coeffs
        return obj

    def coeff(self, w: Element) -> LaurentPoly:
        return self._coeffs.get(w, ZERO)

    def items(self) -> list[tuple[Element, LaurentPoly]]:
        return sorted(self._coeffs.items(), key=lambda kv: kv[0].index)

    def support(self) -> list[Element]:
        return sorted(self._coeffs, key=lambda w: w.index)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def _same(self, other: "HeckeElt") -> None:
        if other.system is not self.system:
            raise HeckeError("mixed Coxeter systems")
        if other.basis != self.basis:
            raise HeckeError(f"mixed bases {self.basis} and {other.basis}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeElt):
            return NotImplemented
        return (self.system is other.system and self.basis == other.basis
                and self._coeffs == other._coeffs)

    def __hash__(self):
        return hash((self.basis, frozenset(self._coeffs.items())))

    def __add__(self, other: "HeckeElt") -> "HeckeElt":
        self._same(other)
        out = dict(self._coeffs)
        for w, f in other._coeffs.items():
            g = out.get(w, ZERO) + f
            if g:
                out[w] = g
            else:
                out.pop(w, None)
        return HeckeElt._raw(self.system, out, self.basis)

    def __neg__(self) -> "HeckeElt":
        return HeckeElt._raw(self.system, {w: -f for w, f in self._coeffs.items()}, self.basis)

    def __sub__(self, other: "HeckeElt") -> "HeckeElt":
        return self + (-other)

    def scale(self, f) -> "HeckeElt":
        f = LaurentPoly._coerce(f)
        if not f:
            return HeckeElt._raw(self.system, {}, self.basis)
        return HeckeElt._raw(self.system, {w: f * g for w, g in self._coeffs.items()}, self.basis)

    def __rmul__(self, f) -> "HeckeElt":
        if isinstance(f, (int, LaurentPoly)):
            return self.scale(f)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, LaurentPoly)):
            return self.scale(other)
        return mul(self, other)

    def format(self, symbol: Optional[str] = None) -> str:
        if not self._coeffs:
            return "0"
        sym = symbol or {"std": "H", "kl": "b", "pcan": "c"}[self.basis.kind]
        return " ; ".join(f"{f.format()}*{sym}[{w}]" for w, f in self.items())

    def __repr__(self) -> str:
        return f"<{self.basis} {self.format()}>"


# -- standard basis ------------------------------------------------------------


def std_of(w: Element) -> HeckeElt:
    return HeckeElt._raw(w.system, {w: ONE}, STANDARD)


def unit(W: CoxeterSystem) -> HeckeElt:
    return std_of(W.identity())


def zero(W: CoxeterSystem, basis: BasisTag = STANDARD) -> HeckeElt:
    return HeckeElt._raw(W, {}, basis)


_QUAD = V_INV - V


def _rmul_gen(coeffs: dict[int, LaurentPoly], W: CoxeterSystem, s: int) -> dict[int, LaurentPoly]:
    """Right multiplication by H_s on an index-keyed coefficient map."""
    rmul = W.rmul_table[s - 1]
    length = W.lengths
    out: dict[int, LaurentPoly] = {}

    def add(k, f):
        g = out.get(k, ZERO) + f
        if g:
            out[k] = g
        else:
            out.pop(k, None)

    for x, f in coeffs.items():
        xs = int(rmul[x])
        add(xs, f)
        if length[xs] < length[x]:
            add(x, f * _QUAD)
    return out


def mul(h1: HeckeElt, h2: HeckeElt) -> HeckeElt:
    """Product in the standard basis.

    ``h1 * H_y`` is built by right multiplying along the canonical word of
    ``y``; prefixes of canonical words are canonical, so the partial
    products are shared between the terms of ``h2``.
    """
    if h1.system is not h2.system:
        raise HeckeError("mixed Coxeter systems")
    if h1.basis != STANDARD or h2.basis != STANDARD:
        raise HeckeError("mul expects both factors in the standard basis")
    W = h1.system
    base = {w.index: f for w, f in h1._coeffs.items()}
    prefix: dict[int, dict[int, LaurentPoly]] = {0: base}

    def times(y: int) -> dict[int, LaurentPoly]:
        if y not in prefix:
            word = W.word_of(y)
            parent = W.index_of(word[:-1])
            prefix[y] = _rmul_gen(times(parent), W, word[-1])
        return prefix[y]

    out: dict[int, LaurentPoly] = {}
    for y, g in h2._coeffs.items():
        for x, f in times(y.index).items():
            t = out.get(x, ZERO) + f * g
            if t:
                out[x] = t
            else:
                out.pop(x, None)
    return HeckeElt._raw(W, {W[x]: f for x, f in out.items()}, STANDARD)


_BAR_MEMO: "weakref.WeakKeyDictionary[CoxeterSystem, dict]" = weakref.WeakKeyDictionary()


def _bar_std(W: CoxeterSystem, x: int) -> dict[int, LaurentPoly]:
    memo = _BAR_MEMO.setdefault(W, {0: {0: ONE}})
    if x in memo:
        return memo[x]
    # iterative over the word so deep elements don't recurse
    word = W.word_of(x)
    start = 0
    for k in range(len(word), -1, -1):
        if W.index_of(word[:k]) in memo:
            start = k
            break
    cur = memo[W.index_of(word[:start])]
    for k in range(start, len(word)):
        s = word[k]
        # bar(H_s) = H_s + (v - v^-1)
        nxt = _rmul_gen(cur, W, s)
        for y, f in cur.items():
            g = nxt.get(y, ZERO) + f * (V - V_INV)
            if g:
                nxt[y] = g
            else:
                nxt.pop(y, None)
        cur = nxt
        memo[W.index_of(word[: k + 1])] = cur
    return cur


def bar(h: HeckeElt) -> HeckeElt:
    """Bar involution (v -> v^-1, H_w -> H_{w^-1}^-1) on a standard-basis element."""
    if h.basis != STANDARD:
        raise HeckeError("bar expects a standard-basis element")
    W = h.system
    out: dict[int, LaurentPoly] = {}
    for w, f in h._coeffs.items():
        fb = f.bar()
        for y, g in _bar_std(W, w.index).items():
            t = out.get(y, ZERO) + fb * g
            if t:
                out[y] = t
            else:
                out.pop(y, None)
    return HeckeElt._raw(W, {W[y]: f for y, f in out.items()}, STANDARD)


def half_twist(W: CoxeterSystem) -> HeckeElt:
    return std_of(W.longest())


def full_twist(W: CoxeterSystem) -> HeckeElt:
    ht = half_twist(W)
    return mul(ht, ht)


# -- Kazhdan-Lusztig table -----------------------------------------------------


class KLTable:
    """The KL basis of ``W`` expanded in the standard basis.

    Row ``w`` is stored as ``(idx, coeffs)``: the sorted indices ``x <= w``
    and an integer array whose column ``k`` holds the coefficient of ``v^k``
    in ``h_{x,w}``.
    """

    def __init__(self, W: CoxeterSystem, rows: list[tuple[np.ndarray, np.ndarray]],
                 provenance: str = ""):
        self.system = W
        self.rows = rows
        self.provenance = provenance or f"pcells {__version__}"
        self._mu = None

    @property
    def width(self) -> int:
        return int(self.system.longest().length) + 1

    def row_dict(self, w: int) -> dict[int, LaurentPoly]:
        idx, co = self.rows[w]
        out = {}
        for x, r in zip(idx.tolist(), co.tolist()):
            out[x] = LaurentPoly._raw({k: c for k, c in enumerate(r) if c})
        return out

    def h(self, x: Element, w: Element) -> LaurentPoly:
        """Coefficient of ``H_x`` in ``b_w``."""
        idx, co = self.rows[w.index]
        pos = np.searchsorted(idx, x.index)
        if pos < len(idx) and idx[pos] == x.index:
            return LaurentPoly._raw({k: int(c) for k, c in enumerate(co[pos]) if c})
        return ZERO

    def element(self, w: Element) -> HeckeElt:
        W = self.system
        return HeckeElt._raw(W, {W[x]: f for x, f in self.row_dict(w.index).items()}, STANDARD)

    def mu_triples(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All ``(z, w, mu(z, w))`` with ``z < w`` and nonzero mu."""
        if self._mu is None:
            zs, ws, ms = [], [], []
            for w, (idx, co) in enumerate(self.rows):
                if co.shape[1] < 2:
                    continue
                nz = np.flatnonzero(co[:, 1])
                zs.append(idx[nz])
                ws.append(np.full(len(nz), w, dtype=np.int64))
                ms.append(co[nz, 1])
            cat = lambda a: np.concatenate(a) if a else np.zeros(0, dtype=np.int64)
            self._mu = (cat(zs), cat(ws), cat(ms))
        return self._mu

    def mu(self, z: Element, w: Element) -> int:
        return self.h(z, w).coeff(1) if z != w else 0

    def n_pairs(self) -> int:
        return sum(len(idx) for idx, _ in self.rows)


def _build_rows(W: CoxeterSystem) -> list[tuple[np.ndarray, np.ndarray]]:
    N = W.order
    D = W.longest().length + 1
    lmul = W.lmul_table
    length = W.lengths
    rows: list[tuple[np.ndarray, np.ndarray]] = [None] * N
    first = np.zeros((1, D), dtype=np.int64)
    first[0, 0] = 1
    rows[0] = (np.array([0], dtype=np.int64), first)
    dense = np.zeros((N, D), dtype=np.int64)
    ldesc = W.left_descent_table
    for w in range(1, N):
        s = W.word_of(w)[0] - 1
        v = int(lmul[s, w])
        idx, co = rows[v]
        dense[:] = 0
        # b_s H_y = H_sy + v H_y  (sy > y)   or   H_sy + v^-1 H_y  (sy < y)
        sy = lmul[s, idx]
        dense[sy] += co
        up = length[sy] > length[idx]
        dense[idx[up], 1:] += co[up, :-1]
        dense[idx[~up], :-1] += co[~up, 1:]
        # subtract mu(z, v) b_z over z < v with sz < z
        mu_pos = np.flatnonzero(co[:, 1])
        for p in mu_pos:
            z = int(idx[p])
            if ldesc[z, s]:
                zi, zc = rows[z]
                dense[zi] -= int(co[p, 1]) * zc
        nz = np.flatnonzero(dense.any(axis=1))
        block = dense[nz].copy()
        rows[w] = (nz.astype(np.int64), block)
    return rows


_KL_MEMO: "weakref.WeakKeyDictionary[CoxeterSystem, KLTable]" = weakref.WeakKeyDictionary()


def kl_table(W: CoxeterSystem, use_memo: bool = True) -> KLTable:
    """Compute (or fetch the in-process copy of) the KL table of ``W``."""
    if use_memo and W in _KL_MEMO:
        return _KL_MEMO[W]
    table = KLTable(W, _build_rows(W))
    if use_memo:
        _KL_MEMO[W] = table
    return table


def register_kl_table(table: KLTable) -> None:
    _KL_MEMO[table.system] = table


def kl_element(w: Element, table: Optional[KLTable] = None) -> HeckeElt:
    table = table or kl_table(w.system)
    return table.element(w)


# -- basis conversion ----------------------------------------------------------


def _solve_down(W: CoxeterSystem, coeffs: dict[int, LaurentPoly], column, domain=None):
    """Rewrite ``sum f_y X_y`` in a unitriangular basis ``{Y}``.

    ``column(y)`` returns Y_y in X-coordinates (index -> poly, with 1 at y).
    Works from the top of the index order, which refines the Bruhat order.
    """
    rem = dict(coeffs)
    out: dict[int, LaurentPoly] = {}
    missing = []
    while rem:
        y = max(rem)
        a = rem.pop(y)
        if domain is not None and y not in domain:
            missing.append(str(W[y]))
            continue
        out[y] = a
        for x, f in column(y).items():
            if x == y:
                continue
            t = rem.get(x, ZERO) - a * f
            if t:
                rem[x] = t
            else:
                rem.pop(x, None)
    if missing:
        raise PartialTableError(missing)
    return out


def _expand_up(coeffs: dict[int, LaurentPoly], column) -> dict[int, LaurentPoly]:
    out: dict[int, LaurentPoly] = {}
    for y, a in coeffs.items():
        for x, f in column(y).items():
            t = out.get(x, ZERO) + a * f
            if t:
                out[x] = t
            else:
                out.pop(x, None)
    return out


def change_basis(h: HeckeElt, target: BasisTag, kl: Optional[KLTable] = None,
                 pcan=None) -> HeckeElt:
    """Re-express ``h`` in ``target``; ``pcan`` is a BasisTable for PCan tags."""
    W = h.system
    if h.basis == target:
        return h
    kl = kl or kl_table(W)
    coeffs = {w.index: f for w, f in h._coeffs.items()}

    def need_pcan(tag):
        if pcan is None or tag.kind != "pcan":
            raise HeckeError(f"no p-canonical table supplied for {tag}")
        if pcan.tag != tag:
            raise HeckeError(f"table {pcan.tag} does not match {tag}")
        return pcan

    # go up to the standard basis first
    if h.basis.kind == "pcan":
        t = need_pcan(h.basis)
        t.require([W[y] for y in coeffs])
        coeffs = _expand_up(coeffs, t.kl_column)
        if target == KL:
            return HeckeElt._raw(W, {W[x]: f for x, f in coeffs.items()}, KL)
        coeffs = _expand_up(coeffs, kl.row_dict)
    elif h.basis == KL:
        if target.kind == "pcan":
            t = need_pcan(target)
            out = _solve_down(W, coeffs, t.kl_column, t.domain_indices)
            return HeckeElt._raw(W, {W[x]: f for x, f in out.items()}, target)
        coeffs = _expand_up(coeffs, kl.row_dict)
    if target == STANDARD:
        return HeckeElt._raw(W, {W[x]: f for x, f in coeffs.items()}, STANDARD)
    coeffs = _solve_down(W, coeffs, kl.row_dict)
    if target == KL:
        return HeckeElt._raw(W, {W[x]: f for x, f in coeffs.items()}, KL)
    t = need_pcan(target)
    out = _solve_down(W, coeffs, t.kl_column, t.domain_indices)
    return HeckeElt._raw(W, {W[x]: f for x, f in out.items()}, target)


# -- validation and persistent cache -------------------------------------------


def validate_kl(table: KLTable, bar_rows: Optional[Iterable[int]] = None) -> list[str]:
    """Structural scan of every row plus bar-invariance on ``bar_rows``.

    Returns a list of problems (empty when the table is sound).  Default
    ``bar_rows`` is every row for groups of order <= 64, otherwise the rows
    of length <= 3.
    """
    W = table.system
    N = W.order
    length = W.lengths
    problems = []
    if len(table.rows) != N:
        return [f"table has {len(table.rows)} rows, group has order {N}"]
    below = W.bruhat_matrix()
    for w, (idx, co) in enumerate(table.rows):
        name = str(W[w])
        if not np.array_equal(idx, np.flatnonzero(below[:, w])):
            problems.append(f"{name}: support is not the Bruhat interval below it")
            continue
        top = np.searchsorted(idx, w)
        if co[top, 0] != 1 or co[top, 1:].any():
            problems.append(f"{name}: diagonal coefficient is not 1")
        rest = np.delete(co, top, axis=0)
        rest_idx = np.delete(idx, top)
        if rest.shape[0]:
            if rest[:, 0].any():
                problems.append(f"{name}: off-diagonal coefficient outside vZ[v]")
            gap = length[w] - length[rest_idx]
            ks = np.arange(co.shape[1])[None, :]
            bad = (rest != 0) & ((ks > gap[:, None]) | ((gap[:, None] - ks) % 2 == 1))
            if bad.any():
                problems.append(f"{name}: exponent violates degree/parity bound")
            if (rest[:, 1:] == 0).all(axis=1).any():
                problems.append(f"{name}: zero coefficient inside the Bruhat interval")
    if problems:
        return problems
    if bar_rows is None:
        bar_rows = range(N) if N <= 64 else [w for w in range(N) if length[w] <= 3]
    for w in bar_rows:
        b = table.element(W[w])
        if bar(b) != b:
            problems.append(f"{W[w]}: b_w is not bar-invariant")
    return problems


CACHE_FORMAT = "format klcache v1"


def _term_list(W: CoxeterSystem, pairs: Iterable[tuple[int, LaurentPoly]]) -> str:
    return " ; ".join(f"{f.format()}*{W[x]}" for x, f in pairs)


def dump_kl(table: KLTable) -> str:
    W = table.system
    body_lines = []
    for w in range(W.order):
        terms = sorted(table.row_dict(w).items())
        body_lines.append(f"{W[w]} : {_term_list(W, terms)}")
    body = "\n".join(body_lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    header = [CACHE_FORMAT, f"type {W.label}", f"order {W.order}", f"checksum {digest}",
              f"# {table.provenance}"]
    return "\n".join(header) + "\n" + body


def parse_term_list(W: CoxeterSystem, text: str, lineno: int = 0,
                    where: Optional[str] = None) -> list[tuple[int, LaurentPoly]]:
    where = where or f"line {lineno}"
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        if "*" not in item:
            raise HeckeError(f"{where}: expected POLY*WORD, got {item!r}")
        poly_text, word = item.rsplit("*", 1)
        try:
            f = parse_poly(poly_text)
            x = W.index_of(W.parse_word(word))
        except ValueError as exc:
            raise HeckeError(f"{where}: {exc}") from None
        out.append((x, f))
    return out


def cache_save(table: KLTable, path) -> Path:
    """Write atomically (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dump_kl(table))
    tmp.replace(path)
    return path


def cache_load(path, W: Optional[CoxeterSystem] = None, validate: bool = True) -> KLTable:
    text = Path(path).read_text()
    lines = text.splitlines()
    header: dict[str, str] = {}
    body_start = None
    for n, line in enumerate(lines):
        if line.startswith("#") or not line.strip():
            continue
        if ":" in line:
            body_start = n
            break
        key, _, value = line.partition(" ")
        header[key] = value.strip()
    if header.get("format") != CACHE_FORMAT.split(" ", 1)[1]:
        raise CacheError(f"{path}: unsupported cache version {header.get('format')!r}")
    label = header.get("type")
    if label is None:
        raise CacheError(f"{path}: missing type header")
    if W is None:
        W = build(label)
    elif W.label != label:
        raise CacheError(f"{path}: cache is for type {label}, expected {W.label}")
    if int(header.get("order", -1)) != W.order:
        raise CacheError(f"{path}: order header {header.get('order')} != |W| = {W.order}")
    body_lines = [l for l in lines[body_start:] if l.strip() and not l.startswith("#")] \
        if body_start is not None else []
    if "checksum" in header:
        body = "\n".join(body_lines) + "\n"
        if hashlib.sha256(body.encode()).hexdigest() != header["checksum"]:
            raise CacheError(f"{path}: checksum mismatch")
    D = W.longest().length + 1
    rows: list = [None] * W.order
    for k, line in enumerate(body_lines):
        lineno = (body_start or 0) + k + 1
        word, _, rest = line.partition(":")
        w = W.index_of(W.parse_word(word.strip()))
        if rows[w] is not None:
            raise CacheError(f"{path}: line {lineno}: duplicate row for {W[w]}")
        terms = sorted(parse_term_list(W, rest, lineno))
        idx = np.array([x for x, _ in terms], dtype=np.int64)
        co = np.zeros((len(terms), D), dtype=np.int64)
        for r, (_, f) in enumerate(terms):
            for e, c in f.items():
                if not 0 <= e < D:
                    raise CacheError(f"{path}: line {lineno}: exponent {e} out of range")
                co[r, e] = c
        rows[w] = (idx, co)
    absent = [str(W[w]) for w, r in enumerate(rows) if r is None]
    if absent:
        raise CacheError(f"{path}: missing rows for {', '.join(absent[:10])}")
    table = KLTable(W, rows, provenance=f"loaded from {path}")
    if validate:
        problems = validate_kl(table)
        if problems:
            raise CacheError(f"{path}: validation failed: {problems[0]}"
                             + (f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""))
    return table
