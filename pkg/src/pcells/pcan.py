"""p-canonical basis tables, stored over the KL basis.

A table lists ``c_w = sum_x m_{x,w} b_x`` for the elements it knows.  With
``complete true`` every unlisted element has ``c_w = b_w``; otherwise the
table is partial and its domain is exactly the listed words.

>>> from pcells.coxeter import build
>>> t = builtin(build("C2"), 2)
>>> t.column_text(build("C2")[5])
'1*121 ; 1*1'
>>> validate(t)
[]
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

from .coxeter import CoxeterSystem, Element
from .hecke import (
    BasisTag, HeckeElt, HeckeError, KLTable, PartialTableError, STANDARD, kl_table,
    parse_term_list,
)
from .laurent import ONE, LaurentPoly, ZERO

FORMAT = "pcan v1"
CONVENTION = "soergel-v"


class TableError(HeckeError):
    """Malformed or inconsistent p-canonical table file."""


class BasisTable:
    """Lower unitriangular change of basis from KL to p-canonical."""

    def __init__(self, system: CoxeterSystem, p: int, columns: dict[int, dict[int, LaurentPoly]],
                 complete: bool = True, domain: Optional[Iterable[int]] = None,
                 provenance: str = "", table_id: Optional[str] = None):
        self.system = system
        self.p = int(p)
        cols = {}
        for w, col in columns.items():
            col = {x: f for x, f in col.items() if f}
            col.setdefault(w, ONE)
            cols[w] = col
        self._cols = cols
        self.complete = complete
        if complete:
            self._domain = None
        else:
            self._domain = frozenset(domain if domain is not None else cols)
        self.provenance = provenance
        self.table_id = table_id or ("identity" if self.p == 0 and not self.nontrivial() else
                                     f"{system.label}-p{self.p}")

    @property
    def tag(self) -> BasisTag:
        return BasisTag("pcan", self.p, self.table_id)

    @property
    def domain_indices(self) -> Optional[frozenset[int]]:
        """``None`` for complete tables."""
        return self._domain

    def in_domain(self, w: int) -> bool:
        return self._domain is None or w in self._domain

    def kl_column(self, w: int) -> dict[int, LaurentPoly]:
        if not self.in_domain(w):
            raise PartialTableError([str(self.system[w])])
        return self._cols.get(w, {w: ONE})

    def nontrivial(self) -> dict[int, dict[int, LaurentPoly]]:
        """Columns with an off-diagonal entry."""
        return {w: c for w, c in self._cols.items() if len(c) > 1}

    def listed(self) -> list[int]:
        return sorted(self._cols)

    def m(self, x: Element, w: Element) -> LaurentPoly:
        return self.kl_column(w.index).get(x.index, ZERO)

    def require(self, elements: Iterable[Element]) -> None:
        missing = completeness_check(self, elements)
        if missing:
            raise PartialTableError(missing)

    def column_text(self, w: Element) -> str:
        col = self.kl_column(w.index)
        return " ; ".join(f"{col[x].format()}*{self.system[x]}" for x in sorted(col, reverse=True))

    def __repr__(self) -> str:
        kind = "complete" if self.complete else f"partial({len(self._domain)})"
        return f"<BasisTable {self.system.label} p={self.p} {kind} {len(self.nontrivial())} non-identity>"


def identity_table(W: CoxeterSystem) -> BasisTable:
    return BasisTable(W, 0, {}, complete=True, provenance="identity", table_id="identity")


def _cols_from_words(W: CoxeterSystem, data: dict[str, str]) -> dict[int, dict[int, LaurentPoly]]:
    cols = {}
    for word, terms in data.items():
        w = W.index_of(W.parse_word(word))
        cols[w] = {x: f for x, f in parse_term_list(W, terms)}
    return cols


def builtin(W: CoxeterSystem, p: int) -> BasisTable:
    """Tables small enough to write down by hand.

    * ``p == 0``: the identity table, for any type;
    * C2 at p = 2: the single non-identity entry ``c_121 = b_121 + b_1``;
    * C3 at p = 2: a partial table on ``{121, 121321, 12132132, w0}``.
    """
    if p == 0:
        return identity_table(W)
    label = W.label
    if p == 2 and label == "C2":
        cols = _cols_from_words(W, {"121": "1*121 ; 1*1"})
        return BasisTable(W, 2, cols, complete=True, provenance="builtin", table_id=f"builtin-{label}-p2")
    if p == 2 and label == "C3":
        cols = _cols_from_words(W, {
            "121": "1*121",
            "121321": "1*121321 ; v^-1+v*121",
            "12132132": "1*12132132 ; 1*121321",
            "121321323": "1*121321323",
        })
        return BasisTable(W, 2, cols, complete=False, provenance="builtin (partial)",
                          table_id=f"builtin-{label}-p2-partial")
    raise TableError(f"no builtin p-canonical table for ({label}, p={p})")


def validate(table: BasisTable) -> list[str]:
    """Every violated invariant, one message per problem (empty means accepted)."""
    W = table.system
    problems = []
    if table.p < 0:
        problems.append(f"p = {table.p} is negative")
    for w, col in sorted(table._cols.items()):
        name = str(W[w])
        if col.get(w) != ONE:
            problems.append(f"{name}: diagonal coefficient is {col.get(w, ZERO).format()}, not 1")
        for x, f in sorted(col.items()):
            if x == w:
                continue
            if not W.bruhat_leq_index(x, w):
                problems.append(f"{name}: term {W[x]} is not Bruhat-below {name}")
            if not f.is_selfdual():
                problems.append(f"{name}: coefficient {f.format()} of {W[x]} is not self-dual")
            if not f.is_nonnegative():
                problems.append(f"{name}: coefficient {f.format()} of {W[x]} has a negative coefficient")
    if table.p == 0 and table.nontrivial():
        problems.append("p = 0 table must be the identity")
    if table._domain is not None:
        extra = [str(W[w]) for w in table._cols if w not in table._domain]
        if extra:
            problems.append(f"entries outside declared domain: {', '.join(extra)}")
    return problems


def completeness_check(table: BasisTable, needed: Iterable[Element]) -> list[str]:
    """Words of ``needed`` outside the table's domain (empty list means ok)."""
    if table.complete:
        return []
    W = table.system
    missing = sorted({w.index for w in needed if w.index not in table._domain})
    return [str(W[w]) for w in missing]


def pcan_element(table: BasisTable, w: Element, kl: Optional[KLTable] = None) -> HeckeElt:
    """``c_w`` expanded in the standard basis."""
    kl = kl or kl_table(table.system)
    W = table.system
    out: dict = {}
    for z, m in table.kl_column(w.index).items():
        for x, h in kl.row_dict(z).items():
            t = out.get(x, ZERO) + m * h
            if t:
                out[x] = t
            else:
                out.pop(x, None)
    return HeckeElt(W, {W[x]: f for x, f in out.items()}, STANDARD)


def basis_element(table: BasisTable, w: Element) -> HeckeElt:
    """The single-term element ``c_w`` tagged with the table's basis."""
    table.require([w])
    return HeckeElt(table.system, {w: ONE}, table.tag)


# -- file format -----------------------------------------------------------------


def dumps(table: BasisTable) -> str:
    """Normal form: complete tables list only non-identity columns."""
    W = table.system
    lines = [f"format {FORMAT}", f"type {W.label}", f"p {table.p}", f"convention {CONVENTION}",
             f"complete {'true' if table.complete else 'false'}"]
    if table.provenance:
        lines.append(f"# {table.provenance}")
    ws = sorted(table.nontrivial()) if table.complete else sorted(table._domain)
    for w in ws:
        lines.append(f"{W[w]} : {table.column_text(W[w])}")
    return "\n".join(lines) + "\n"


def save(table: BasisTable, path) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps(table))
    tmp.replace(path)
    return path


def loads(W: CoxeterSystem, text: str, p: Optional[int] = None, source: str = "<string>",
          check: bool = True) -> BasisTable:
    header: dict[str, str] = {}
    cols: dict[int, dict[int, LaurentPoly]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            key, _, value = line.partition(" ")
            header[key] = value.strip()
            continue
        word, _, rest = line.partition(":")
        try:
            w = W.index_of(W.parse_word(word.strip()))
        except ValueError as exc:
            raise TableError(f"{source}:{lineno}: {exc}") from None
        if w in cols:
            raise TableError(f"{source}:{lineno}: duplicate entry for {W[w]}")
        col: dict[int, LaurentPoly] = {}
        try:
            for x, f in parse_term_list(W, rest, where=f"{source}:{lineno}"):
                col[x] = col.get(x, ZERO) + f
        except HeckeError as exc:
            raise TableError(str(exc)) from None
        cols[w] = col
    if header.get("format") != FORMAT:
        raise TableError(f"{source}: expected 'format {FORMAT}', got {header.get('format')!r}")
    if header.get("type") != W.label:
        raise TableError(f"{source}: table is for type {header.get('type')!r}, expected {W.label}")
    if header.get("convention") != CONVENTION:
        raise TableError(f"{source}: convention {header.get('convention')!r} is not {CONVENTION}")
    try:
        file_p = int(header.get("p", ""))
    except ValueError:
        raise TableError(f"{source}: missing or malformed 'p' header") from None
    if p is not None and file_p != p:
        raise TableError(f"{source}: table has p = {file_p}, expected {p}")
    flag = header.get("complete")
    if flag not in ("true", "false"):
        raise TableError(f"{source}: 'complete' header must be true or false")
    table = BasisTable(W, file_p, cols, complete=(flag == "true"),
                       provenance=f"loaded from {source}", table_id=Path(source).stem)
    if check:
        problems = validate(table)
        if problems:
            raise TableError(f"{source}: {len(problems)} validation problem(s): " + "; ".join(problems))
    return table


def load(W: CoxeterSystem, path, p: Optional[int] = None) -> BasisTable:
    return loads(W, Path(path).read_text(), p=p, source=str(path))
