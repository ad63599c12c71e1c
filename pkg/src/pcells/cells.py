"""Cells of a Hecke algebra basis: preorders, partitions, ideals, a-function.

The basis is the KL basis (``table=None`` or the identity table) or a
p-canonical table.  ``y <=_L w`` when ``c_y`` occurs in a chain of left
multiplications of ``c_w`` by generators ``c_s``; with this convention the
identity sits at the top of every order and ``w0`` at the bottom.

>>> from pcells.coxeter import build
>>> dec = cell_partition(build("C2"), side="two-sided")
>>> [dec.words(i) for i in range(len(dec))]
[['e'], ['1', '2', '12', '21', '121', '212'], ['1212']]
>>> dec.is_below(2, 1), dec.is_below(1, 2)
(True, False)
"""

from __future__ import annotations

import threading
import weakref
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .coxeter import CoxeterSystem, Element
from .engine import Block, Engine, engine_for
from .hecke import HeckeElt, HeckeError
from .laurent import LaurentPoly, ZERO

SIDES = ("left", "right", "two-sided")


class IdealError(HeckeError):
    """A term survived ideal reduction in a cell not comparable to the target."""


def basis_id(table) -> str:
    if table is None or (table.complete and not table.nontrivial()):
        return "KL"
    return str(table.tag)


def basis_p(table) -> int:
    return 0 if table is None else table.p


@dataclass
class CellDecomposition:
    """Cells of one side of one basis.

    ``cells[i]`` is a sorted tuple of element indices; cell ids are ordered
    by their least element, so the identity is always in cell 0.
    ``below[a, b]`` means cell ``a`` lies strictly below cell ``b``.
    """

    system: CoxeterSystem
    basis: str
    side: str
    p: int
    cells: list[tuple[int, ...]]
    cell_of: np.ndarray
    below: np.ndarray
    hasse: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cells)

    def cell_id(self, w: Element | int) -> int:
        return int(self.cell_of[w if isinstance(w, (int, np.integer)) else w.index])

    def elements(self, i: int) -> list[Element]:
        return [self.system[x] for x in self.cells[i]]

    def words(self, i: int) -> list[str]:
        return [str(self.system[x]) for x in self.cells[i]]

    def is_below(self, a: int, b: int) -> bool:
        return bool(self.below[a, b])

    def comparable(self, a: int, b: int) -> bool:
        return a == b or self.below[a, b] or self.below[b, a]

    def label(self, i: int) -> str:
        """``[[w]]`` for the least element, or ``[[~u]]`` with ``w0 u`` the greatest."""
        W = self.system
        least = W[self.cells[i][0]]
        bar = W.w0_translate(W[self.cells[i][-1]])
        plain = "id" if least.length == 0 else str(least)
        over = "id" if bar.length == 0 else str(bar)
        if bar.length < least.length:
            return f"[[~{over}]]"
        return f"[[{plain}]]"

    def order_pairs(self) -> list[tuple[int, int]]:
        """All strict relations ``(lower, upper)``."""
        a, b = np.nonzero(self.below)
        return sorted(zip(a.tolist(), b.tolist()))

    def check(self) -> list[str]:
        """Structural invariants; returns problems."""
        problems = []
        N = self.system.order
        seen = np.zeros(N, dtype=int)
        for c in self.cells:
            seen[list(c)] += 1
        if not (seen == 1).all():
            problems.append("cells do not partition W")
        if (self.below & self.below.T).any() or np.diag(self.below).any():
            problems.append("order has a cycle")
        return problems


# -- preorder ---------------------------------------------------------------------


def _edges(eng: Engine, side: str, batch: int = 64) -> sp.csr_matrix:
    """Adjacency ``A[w, y] = 1`` when ``c_y`` occurs in ``c_s c_w`` (or ``c_w c_s``)."""
    W = eng.W
    N = W.order
    rank = len(W.generators())
    src, dst = [], []
    dom = eng.domain()
    if dom is not None:
        from .hecke import PartialTableError
        raise PartialTableError([str(W[w]) for w in range(N) if w not in dom],
                                what="cell computation needs a complete table; it")
    for start in range(0, N, batch):
        cols = list(range(start, min(start + batch, N)))
        X = eng.kl_of(cols)
        for s in range(rank):
            Y = eng.from_kl(eng.gen_product(X, s, side))
            ys, js = np.nonzero(Y.data.any(axis=2))
            src.append(np.asarray(cols)[js])
            dst.append(ys)
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    return sp.csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(N, N))


_PRE_MEMO: dict = {}
_PRE_LOCK = threading.Lock()


def preorder(W: CoxeterSystem, table=None, side: str = "left") -> sp.csr_matrix:
    """One-step relation of the preorder as a sparse adjacency matrix.

    Row ``w`` lists every ``y`` with ``c_y`` a summand of a generator times
    ``c_w``; the preorder is its reflexive-transitive closure.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    eng = engine_for(W, table)
    key = (id(eng), side)
    with _PRE_LOCK:
        if key in _PRE_MEMO and _PRE_MEMO[key][0]() is eng:
            return _PRE_MEMO[key][1]
    if side == "two-sided":
        A = preorder(W, table, "left") + preorder(W, table, "right")
        A = (A > 0).astype(np.int8)
    else:
        A = _edges(eng, side)
    with _PRE_LOCK:
        _PRE_MEMO[key] = (weakref.ref(eng), A)
    return A


def reachable(A: sp.csr_matrix, w: int) -> np.ndarray:
    """Indices ``y`` with ``y <= w`` (including ``w``)."""
    from scipy.sparse.csgraph import breadth_first_order
    return np.sort(breadth_first_order(A, w, directed=True, return_predecessors=False))


def partition_from_adjacency(W: CoxeterSystem, A: sp.csr_matrix, side: str, basis: str = "KL",
                             p: int = 0) -> CellDecomposition:
    n, labels = connected_components(A, directed=True, connection="strong")
    # renumber cells by least element
    first = np.full(n, W.order, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(W.order))
    order = np.argsort(first)
    rename = np.empty(n, dtype=np.int64)
    rename[order] = np.arange(n)
    cell_of = rename[labels]
    cells = [[] for _ in range(n)]
    for w, c in enumerate(cell_of.tolist()):
        cells[c].append(w)
    cells = [tuple(c) for c in cells]
    # condensation DAG
    coo = A.tocoo()
    a, b = cell_of[coo.row], cell_of[coo.col]
    keep = a != b
    succ = [set() for _ in range(n)]
    for x, y in zip(a[keep].tolist(), b[keep].tolist()):
        succ[x].add(y)
    # reachability as int bitsets, in reverse topological order
    indeg = np.zeros(n, dtype=int)
    for x in range(n):
        for y in succ[x]:
            indeg[y] += 1
    topo, stack = [], [x for x in range(n) if indeg[x] == 0]
    while stack:
        x = stack.pop()
        topo.append(x)
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                stack.append(y)
    if len(topo) != n:
        raise HeckeError("condensation is not acyclic")
    reach = [0] * n
    for x in reversed(topo):
        r = 0
        for y in succ[x]:
            r |= reach[y] | (1 << y)
        reach[x] = r
    below = np.zeros((n, n), dtype=bool)
    for x in range(n):
        for y in range(n):
            if reach[x] >> y & 1:
                below[y, x] = True
    hasse = []
    for x in range(n):
        for y in range(n):
            if below[y, x] and not any(below[y, z] and below[z, x] for z in range(n)):
                hasse.append((y, x))
    return CellDecomposition(W, basis, side, p, cells, cell_of, below, sorted(hasse))


_DEC_MEMO: dict = {}


def cell_partition(W: CoxeterSystem, table=None, side: str = "left") -> CellDecomposition:
    """Cells of ``side`` for the basis ``table`` (``None`` for KL)."""
    eng = engine_for(W, table)
    key = (id(eng), side)
    with _PRE_LOCK:
        if key in _DEC_MEMO and _DEC_MEMO[key][0]() is eng:
            return _DEC_MEMO[key][1]
    A = preorder(W, table, side)
    dec = partition_from_adjacency(W, A, side, basis_id(table), basis_p(table))
    with _PRE_LOCK:
        _DEC_MEMO[key] = (weakref.ref(eng), dec)
    return dec


def incomparable_left_cells(left: CellDecomposition, two: CellDecomposition) -> list[str]:
    """Problems with 'left cells inside a two-sided cell are incomparable'."""
    problems = []
    for t in range(len(two)):
        ids = sorted({left.cell_id(w) for w in two.cells[t]})
        for a in ids:
            for b in ids:
                if left.below[a, b]:
                    problems.append(f"left cells {left.label(a)} < {left.label(b)} inside {two.label(t)}")
        members = {w for i in ids for w in left.cells[i]}
        if members != set(two.cells[t]):
            problems.append(f"{two.label(t)} is not a union of left cells")
    return problems


# -- coefficients ---------------------------------------------------------------------


def mu(W: CoxeterSystem, table, w: Element, x: Element, y: Element) -> LaurentPoly:
    """Coefficient of ``c_y`` in ``c_w c_x``."""
    eng = engine_for(W, table)
    return eng.multiply([w.index], [x.index]).poly(y.index, 0)


def h_coeff(W: CoxeterSystem, table, x: Element, y: Element) -> LaurentPoly:
    """Coefficient of ``H_y`` in ``c_x``."""
    eng = engine_for(W, table)
    return eng.std_of([x.index]).poly(y.index, 0)


# -- ideals ----------------------------------------------------------------------------


def ideal_reduce(h: HeckeElt, lam: int, dec: CellDecomposition) -> HeckeElt:
    """Drop terms in cells strictly below ``lam``.

    ``h`` must be written in the decomposition's basis.  A term whose cell is
    neither ``lam`` nor below it raises :class:`IdealError`.
    """
    keep = {}
    bad = []
    for w, f in h.items():
        c = dec.cell_id(w)
        if dec.below[c, lam]:
            continue
        if c != lam:
            bad.append(str(w))
        keep[w] = f
    if bad:
        raise IdealError(f"terms {', '.join(bad)} lie outside {dec.label(lam)} and the ideal below it")
    return HeckeElt(h.system, keep, h.basis)


def reduce_rows(X: Block, col: int, lam: int, dec: CellDecomposition) -> tuple[list[int], list[int]]:
    """Surviving rows of a block column and the rows that break the ideal property."""
    rows = X.support(col)
    cells = dec.cell_of[rows]
    strictly = dec.below[cells, lam]
    survivors = rows[~strictly]
    bad = [int(y) for y in survivors if dec.cell_of[y] != lam]
    return [int(y) for y in survivors], bad


# -- a-function -------------------------------------------------------------------------


class AFunctionError(HeckeError):
    pass


def a_function_all(W: CoxeterSystem, table=None, allow_large: bool = False,
                   batch: int = 128) -> np.ndarray:
    """``a(z) = max_{x,y} -val(coefficient of c_z in c_x c_y)`` for every ``z``.

    Costs |W| products of |W| trie steps each; refused above rank 3 unless
    ``allow_large``.
    """
    if len(W.generators()) > 3 and not allow_large:
        raise AFunctionError("a-function above rank 3 needs allow_large=True (|W|^2 products)")
    eng = engine_for(W, table)
    N = W.order
    a = np.full(N, np.iinfo(np.int64).min, dtype=np.int64)
    cols = list(range(N))
    for start in range(0, N, batch):
        ys = cols[start:start + batch]
        X = eng.kl_of(ys)
        for x in range(N):
            K = eng.std_of([x] * len(ys))
            P = eng.from_kl(eng.product(K, X))
            nz = P.data.any(axis=1)  # (N, D)
            has = nz.any(axis=1)
            first = np.argmax(nz, axis=1)
            val = P.lo + first
            upd = has & (-val > a)
            a[upd] = -val[upd]
    return a


def a_function(W: CoxeterSystem, table, z: Element, allow_large: bool = False) -> int:
    return int(a_function_all(W, table, allow_large)[z.index])


# -- distinguished involutions -----------------------------------------------------------


@dataclass
class Candidate:
    element: Element
    lhs: Optional[int]  # -val(mu_{d,d}^d), None when the coefficient vanishes
    rhs: int  # val(h_d^1)

    @property
    def wins(self) -> bool:
        return self.lhs is not None and self.lhs >= self.rhs

    @property
    def equality(self) -> bool:
        return self.lhs is not None and self.lhs == self.rhs


@dataclass
class DistinguishedResult:
    cell: int
    label: str
    candidates: list[Candidate]

    @property
    def winners(self) -> list[Element]:
        return [c.element for c in self.candidates if c.wins]

    @property
    def conforming(self) -> bool:
        return len(self.winners) == 1


def distinguished(W: CoxeterSystem, table, dec: CellDecomposition,
                  batch: int = 32) -> list[DistinguishedResult]:
    """Evaluate ``-val(mu_{d,d}^d) >= val(h_d^1)`` on every involution ``d``."""
    eng = engine_for(W, table)
    inv = [w for w in range(W.order) if W[w].is_involution()]
    lhs: dict[int, Optional[int]] = {}
    rhs: dict[int, int] = {}
    for start in range(0, len(inv), batch):
        ds = inv[start:start + batch]
        K = eng.std_of(ds)
        P = eng.from_kl(eng.product(K, eng.kl_of(ds)))
        for j, d in enumerate(ds):
            f = P.poly(d, j)
            lhs[d] = -f.val() if f else None
            rhs[d] = K.poly(0, j).val()
    out = []
    for i in range(len(dec)):
        cands = [Candidate(W[d], lhs[d], rhs[d]) for d in dec.cells[i] if d in lhs]
        out.append(DistinguishedResult(i, dec.label(i), cands))
    return out


# -- comparisons ---------------------------------------------------------------------------


@dataclass
class DiffReport:
    splits: list[tuple[str, list[list[str]]]]
    migrations: list[tuple[str, str, str]]  # element, from 0-cell, to 0-cell label of its p-cell
    only_in_first: list[tuple[str, str]]
    only_in_second: list[tuple[str, str]]

    def is_empty(self) -> bool:
        return not (self.splits or self.migrations or self.only_in_first or self.only_in_second)


def diff(dec0: CellDecomposition, decp: CellDecomposition) -> DiffReport:
    """Compare two decompositions of the same group and side.

    Migration targets are named by the 0-cell contributing most members to
    the element's new cell.
    """
    if dec0.system is not decp.system or dec0.side != decp.side:
        raise ValueError("diff needs decompositions of the same group and side")
    W = dec0.system
    splits = []
    for i, members in enumerate(dec0.cells):
        parts = sorted({decp.cell_id(w) for w in members})
        if len(parts) > 1:
            groups = [[str(W[w]) for w in members if decp.cell_id(w) == j] for j in parts]
            splits.append((dec0.label(i), groups))
    migrations = []
    for j, members in enumerate(decp.cells):
        counts = Counter(dec0.cell_id(w) for w in members)
        home = min(counts, key=lambda c: (-counts[c], c))
        for w in members:
            if dec0.cell_id(w) != home:
                migrations.append((str(W[w]), dec0.label(dec0.cell_id(w)), dec0.label(home)))
    reps = sorted({c[0] for c in dec0.cells} | {c[0] for c in decp.cells})
    first, second = [], []
    for a in reps:
        for b in reps:
            r0 = dec0.below[dec0.cell_id(a), dec0.cell_id(b)]
            rp = decp.below[decp.cell_id(a), decp.cell_id(b)]
            if r0 and not rp:
                first.append((str(W[a]), str(W[b])))
            elif rp and not r0:
                second.append((str(W[a]), str(W[b])))
    return DiffReport(splits, migrations, first, second)


class StatRow(NamedTuple):
    left: int
    two_sided: int
    unique_pairs: int
    fixed: int
    moving: int


def stats(left: CellDecomposition, two: CellDecomposition, report) -> StatRow:
    """Counts of left and two-sided cells, distinct (x, sign) and Schu orbits."""
    pairs = {v for v in report.two_sided_values.values() if v is not None}
    return StatRow(len(left), len(two), len(pairs), report.fixed, report.moving)
