"""Half- and full-twist eigenvalues on cells.

For each ``w`` the half twist ``H_{w0}`` is applied to ``c_w`` and the
result is reduced modulo the cells strictly below the two-sided cell of
``w``.  A well-behaved element leaves exactly one term ``± v^x c_u``; ``u``
is its Schützenberger partner.  Anything else is recorded as a violation
rather than raised.

>>> from pcells.coxeter import build
>>> rep = verify(build("C2"))
>>> [rep.two_sided_values[i] for i in range(3)]
[(4, 1), (0, -1), (-4, 1)]
>>> rep.all_ok, rep.fixed, rep.moving
(True, 4, 4)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .cells import CellDecomposition, basis_id, basis_p, cell_partition, reduce_rows
from .coxeter import CoxeterSystem, Element
from .engine import Block, engine_for
from .hecke import KL, BasisTag, HeckeElt, HeckeError
from .laurent import LaurentPoly


def _tag(table) -> BasisTag:
    if table is None or (table.complete and not table.nontrivial()):
        return KL
    return table.tag


@dataclass
class EigenDatum:
    element: Element
    cell: int
    left_cell: int
    x: Optional[int] = None
    sign: Optional[int] = None
    schu: Optional[Element] = None
    status: str = "ok"
    details: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def pair(self) -> Optional[tuple[int, int]]:
        return None if self.x is None else (self.x, self.sign)


@dataclass
class TwistReport:
    system: CoxeterSystem
    basis: str
    p: int
    left: CellDecomposition
    two: CellDecomposition
    data: list[EigenDatum]
    left_values: dict[int, Optional[tuple[int, int]]] = field(default_factory=dict)
    two_sided_values: dict[int, Optional[tuple[int, int]]] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    fixed: int = 0
    moving: int = 0
    x_reversals: list[tuple[str, str]] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return not self.violations

    def datum(self, w: Element) -> EigenDatum:
        return self.data[w.index]

    def schu(self, w: Element) -> Optional[Element]:
        return self.data[w.index].schu

    def schu_pairs(self, cell: int, side: str = "left") -> tuple[list[tuple[Element, Element]], list[Element]]:
        """Moving pairs (smaller element first) and fixed points of a cell."""
        dec = self.left if side == "left" else self.two
        pairs, fixed = [], []
        for w in dec.cells[cell]:
            d = self.data[w]
            if d.schu is None:
                continue
            if d.schu.index == w:
                fixed.append(d.element)
            elif w < d.schu.index:
                pairs.append((d.element, d.schu))
        return pairs, fixed


def _extract(W, X: Block, col: int, w: int, two: CellDecomposition, left: CellDecomposition) -> EigenDatum:
    lam = int(two.cell_of[w])
    d = EigenDatum(W[w], lam, int(left.cell_of[w]))
    survivors, bad = reduce_rows(X, col, lam, two)
    if bad:
        d.status = "outside-ideal"
        d.details = "terms outside the cell and its lower ideal: " + ", ".join(str(W[y]) for y in bad)
        return d
    if len(survivors) != 1:
        d.status = "survivors"
        d.details = f"{len(survivors)} surviving terms: " + ", ".join(
            f"{X.poly(y, col).format()}*{W[y]}" for y in survivors)
        return d
    y = survivors[0]
    f = X.poly(y, col)
    mono = f.signed_monomial()
    if mono is None:
        d.status = "non-monomial"
        d.details = f"coefficient {f.format()} of {W[y]} is not ±v^x"
        return d
    d.x, d.sign, d.schu = mono.exponent, mono.sign, W[y]
    if left.cell_of[y] != left.cell_of[w]:
        d.status = "left-cell"
        d.details = f"partner {W[y]} lies outside the left cell of {W[w]}"
    return d


def act_half(W: CoxeterSystem, table, w: Element) -> HeckeElt:
    """``H_{w0} c_w`` in the basis of ``table``."""
    eng = engine_for(W, table)
    X = eng.from_kl(eng.half(eng.kl_of([w.index])))
    return HeckeElt(W, {W[y]: f for y, f in X.column(0).items()}, _tag(table))


def act_full(W: CoxeterSystem, table, w: Element) -> HeckeElt:
    """``H_{w0}^2 c_w`` in the basis of ``table``."""
    eng = engine_for(W, table)
    X = eng.from_kl(eng.half(eng.half(eng.kl_of([w.index]))))
    return HeckeElt(W, {W[y]: f for y, f in X.column(0).items()}, _tag(table))


def _half_blocks(eng, cols: Sequence[int], times: int = 1, batch: int = 64):
    for start in range(0, len(cols), batch):
        part = list(cols[start:start + batch])
        X = eng.kl_of(part)
        for _ in range(times):
            X = eng.half(X)
        yield part, eng.from_kl(X)


def eigen_extract(W: CoxeterSystem, table, w: Element,
                  two: Optional[CellDecomposition] = None,
                  left: Optional[CellDecomposition] = None) -> EigenDatum:
    two = two or cell_partition(W, table, "two-sided")
    left = left or cell_partition(W, table, "left")
    eng = engine_for(W, table)
    X = eng.from_kl(eng.half(eng.kl_of([w.index])))
    return _extract(W, X, 0, w.index, two, left)


def _consolidate(dec: CellDecomposition, data: list[EigenDatum], what: str, problems: list[str]):
    values = {}
    for i, members in enumerate(dec.cells):
        seen = {data[w].pair for w in members}
        if None in seen or len(seen) != 1:
            values[i] = None
            shown = sorted((p for p in seen if p is not None))
            problems.append(f"(x, sign) not constant on {what} cell {dec.label(i)}: {shown}")
        else:
            values[i] = seen.pop()
    return values


def verify(W: CoxeterSystem, table=None, two: Optional[CellDecomposition] = None,
           left: Optional[CellDecomposition] = None) -> TwistReport:
    """Eigen data for every element plus the consistency checks."""
    two = two or cell_partition(W, table, "two-sided")
    left = left or cell_partition(W, table, "left")
    eng = engine_for(W, table)
    N = W.order
    data: list[Optional[EigenDatum]] = [None] * N
    for part, X in _half_blocks(eng, range(N)):
        for j, w in enumerate(part):
            data[w] = _extract(W, X, j, w, two, left)
    rep = TwistReport(W, basis_id(table), basis_p(table), left, two, data)
    problems = rep.violations
    for d in data:
        if d.status != "ok":
            problems.append(f"{d.element}: {d.status}: {d.details}")
    rep.left_values = _consolidate(left, data, "left", problems)
    rep.two_sided_values = _consolidate(two, data, "two-sided", problems)
    for d in data:
        if d.schu is None:
            continue
        back = data[d.schu.index].schu
        if back is None or back != d.element:
            problems.append(f"Schu is not an involution at {d.element}")
        if d.schu == d.element:
            rep.fixed += 1
        else:
            rep.moving += 1
    # descriptive only: x should grow towards the top of the order
    for lo, hi in two.hasse:
        a, b = rep.two_sided_values.get(lo), rep.two_sided_values.get(hi)
        if a and b and not a[0] < b[0]:
            rep.x_reversals.append((two.label(lo), two.label(hi)))
    return rep


@dataclass
class FullCheck:
    element: Element
    ok: bool
    details: str = ""


def full_check(W: CoxeterSystem, table, report: TwistReport) -> list[FullCheck]:
    """``FT c_w`` reduced mod lower cells must be ``v^(2x) c_w``."""
    eng = engine_for(W, table)
    out: list[Optional[FullCheck]] = [None] * W.order
    two = report.two
    for part, X in _half_blocks(eng, range(W.order), times=2):
        for j, w in enumerate(part):
            d = report.data[w]
            survivors, bad = reduce_rows(X, j, int(two.cell_of[w]), two)
            if d.x is None:
                out[w] = FullCheck(W[w], False, "no half-twist eigenvalue")
                continue
            want = LaurentPoly.monomial(2 * d.x)
            got = {W[y]: X.poly(y, j) for y in survivors}
            if bad or list(got) != [W[w]] or got[W[w]] != want:
                shown = " ; ".join(f"{f.format()}*{u}" for u, f in got.items())
                out[w] = FullCheck(W[w], False, f"expected {want.format()}*{W[w]}, got {shown}")
            else:
                out[w] = FullCheck(W[w], True)
    return out


def full_twist_diagonal(W: CoxeterSystem, table, w: Element) -> LaurentPoly:
    """Coefficient of ``c_w`` in ``FT c_w``.

    Lower-cell terms never contain ``c_w``, so when the full twist acts on
    the cell by ``v^(2x)`` this coefficient is exactly ``v^(2x)``.  Only the
    support of ``FT c_w`` has to be covered, which makes it usable with
    partial tables.
    """
    return act_full(W, table, w).coeff(w)


def x_from_full(W: CoxeterSystem, table, w: Element) -> Optional[int]:
    m = full_twist_diagonal(W, table, w).signed_monomial()
    if m is None or m.sign != 1 or m.exponent % 2:
        return None
    return m.exponent // 2


@dataclass
class SwapResult:
    first: Element
    second: Element
    x0: tuple[Optional[int], Optional[int]]
    xp: tuple[Optional[int], Optional[int]]

    @property
    def swapped(self) -> bool:
        return (None not in self.x0 and None not in self.xp and self.x0 != self.xp
                and self.x0 == self.xp[::-1])


def swap_probe(W: CoxeterSystem, table0, table_p, pairs: Iterable[tuple[Element, Element]]) -> list[SwapResult]:
    """x-eigenvalues of each pair in two bases, read off the full twist."""
    out = []
    for a, b in pairs:
        x0 = (x_from_full(W, table0, a), x_from_full(W, table0, b))
        xp = (x_from_full(W, table_p, a), x_from_full(W, table_p, b))
        out.append(SwapResult(a, b, x0, xp))
    return out


def covered_identities(W: CoxeterSystem, table) -> list[tuple[Element, Optional[HeckeElt], str]]:
    """``H_{w0} c_w`` for every ``w`` in a (possibly partial) table's domain."""
    from .hecke import PartialTableError
    dom = table.domain_indices if table is not None else None
    ws = sorted(dom) if dom is not None else range(W.order)
    out = []
    for w in ws:
        try:
            out.append((W[w], act_half(W, table, W[w]), ""))
        except PartialTableError as exc:
            out.append((W[w], None, str(exc)))
    return out
