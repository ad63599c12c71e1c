"""Command-line front end.

Exit status: 0 when every check passes, 1 when violations were found (the
report is still written), 2 for usage or data errors.

Example::

    pcells stats --type C2 --p 2 --pcan builtin
    pcells verify-twist --type C3 --format json -o c3.json
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import cells as cellmod
from . import pcan
from . import twist as twistmod
from .coxeter import CoxeterError, CoxeterSystem, build
from .hecke import (
    CacheError, HeckeError, cache_load, cache_save, kl_table, register_kl_table, validate_kl,
)

CACHE_ENV = "PCELLS_CACHE_DIR"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    type: str
    p: int
    pcan: str
    cache_dir: Optional[Path]
    fmt: str
    output: Optional[Path]
    allow_large: bool


# -- rendering ------------------------------------------------------------------------


def sign_text(sign: Optional[int]) -> str:
    return "" if sign is None else ("+" if sign > 0 else "-")


def plain_label(dec: cellmod.CellDecomposition, i: int, star: bool = False) -> str:
    least = dec.system[dec.cells[i][0]]
    return f"[{'id' if least.length == 0 else least}]" + ("*" if star else "")


def members_text(report: Optional[twistmod.TwistReport], dec, i: int) -> str:
    """Schu pairs first (ordered by smaller element), then fixed points."""
    if report is None or report.left is not dec and report.two is not dec:
        return ", ".join(dec.words(i))
    side = "left" if report.left is dec else "two-sided"
    pairs, fixed = report.schu_pairs(i, side)
    known = {w.index for pr in pairs for w in pr} | {w.index for w in fixed}
    rest = [dec.system[w] for w in dec.cells[i] if w not in known]
    parts = [f"({a}, {b})" for a, b in pairs] + [str(w) for w in fixed] + [str(w) for w in rest]
    return ", ".join(parts)


def contents_rows(dec: cellmod.CellDecomposition, report: Optional[twistmod.TwistReport] = None,
                  dist: Optional[list] = None) -> list[dict]:
    rows = []
    values = {}
    if report is not None:
        values = report.left_values if dec is report.left else report.two_sided_values
    for i in range(len(dec)):
        pairs = []
        if report is not None:
            side = "left" if dec is report.left else "two-sided"
            pairs = [[str(a), str(b)] for a, b in report.schu_pairs(i, side)[0]]
        val = values.get(i)
        rows.append({
            "id": i,
            "side": dec.side,
            "label": plain_label(dec, i, star=bool(pairs)),
            "rep": dec.label(i),
            "members": dec.words(i),
            "members_text": members_text(report, dec, i),
            "x": None if val is None else val[0],
            "sign": None if val is None else sign_text(val[1]),
            "schu_pairs": pairs,
            "distinguished": None if dist is None else [str(w) for w in dist[i].winners],
        })
    return rows


def emit_table(rows: list[dict], fmt: str, meta: Optional[dict] = None) -> str:
    """TSV mirrors the appendix table; JSON is the machine interface."""
    meta = meta or {}
    if fmt == "json":
        doc = {
            "type": meta.get("type"),
            "p": meta.get("p"),
            "cells": [{k: r[k] for k in ("id", "side", "members", "x", "sign", "schu_pairs", "distinguished")}
                      for r in rows],
            "order": meta.get("order", []),
            "stats": meta.get("stats", {}),
        }
        return json.dumps(doc, indent=1) + "\n"
    lines = ["label\tx\tsign\tmembers"]
    for r in rows:
        x = "" if r["x"] is None else str(r["x"])
        lines.append(f"{r['label']}\t{x}\t{r['sign'] or ''}\t{r['members_text']}")
    return "\n".join(lines) + "\n"


def emit_dot(dec: cellmod.CellDecomposition, report: Optional[twistmod.TwistReport] = None) -> str:
    """One node per cell, one edge per Hasse cover (upper -> lower)."""
    values = {}
    if report is not None:
        values = report.left_values if dec is report.left else report.two_sided_values
    name = f"{dec.system.label}_p{dec.p}_{dec.side.replace('-', '_')}"
    lines = [f"digraph {name} {{", "  rankdir=TB;", "  node [shape=box];"]
    for i in range(len(dec)):
        label = dec.label(i)
        v = values.get(i)
        if v is not None:
            label += f"\\n({v[0]},{sign_text(v[1])})"
        lines.append(f'  c{i} [label="{label}"];')
    for lo, hi in dec.hasse:
        lines.append(f"  c{hi} -> c{lo};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_output(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    tmp = output.with_name(output.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(output)


# -- setup ----------------------------------------------------------------------------------


def _system(cfg: RunConfig) -> CoxeterSystem:
    W = build(cfg.type)
    if len(W.generators()) >= 5 and not cfg.allow_large:
        raise UsageError(f"{cfg.type} has rank >= 5; pass --allow-large to run it anyway")
    if cfg.cache_dir is not None:
        path = cfg.cache_dir / f"{W.label}.klcache"
        if path.exists():
            register_kl_table(cache_load(path, W))
    return W


def _table(cfg: RunConfig, W: CoxeterSystem):
    source = cfg.pcan
    if source == "identity":
        if cfg.p != 0:
            raise UsageError("the identity table is the p = 0 basis; use --pcan builtin or a file")
        return None
    if source == "builtin":
        t = pcan.builtin(W, cfg.p)
    else:
        t = pcan.load(W, source, p=cfg.p)
    if cfg.p == 0:
        return None
    return t


def _meta(cfg: RunConfig, dec, stats=None) -> dict:
    return {"type": cfg.type, "p": cfg.p, "order": [list(e) for e in dec.hasse],
            "stats": stats._asdict() if stats is not None else {}}


def _partial_notice(W, table, cfg) -> int:
    lines = [f"# partial table {table.tag}: cells need a complete table;",
             "# checking H_w0 c_w on the table's domain instead"]
    for w, h, err in twistmod.covered_identities(W, table):
        lines.append(f"{w}\t{h.format() if h is not None else 'not covered: ' + err}")
    write_output("\n".join(lines) + "\n", cfg.output)
    print(f"partial table: {len(table.domain_indices)} of {W.order} elements covered", file=sys.stderr)
    return 2


# -- commands ----------------------------------------------------------------------------------


def cmd_cells(cfg, args) -> int:
    W = _system(cfg)
    table = _table(cfg, W)
    dec = cellmod.cell_partition(W, table, args.side)
    if cfg.fmt == "dot":
        write_output(emit_dot(dec), cfg.output)
    else:
        write_output(emit_table(contents_rows(dec), cfg.fmt, _meta(cfg, dec)), cfg.output)
    return 0 if not dec.check() else 1


def _verified(cfg):
    W = _system(cfg)
    table = _table(cfg, W)
    if table is not None and not table.complete:
        return W, table, None
    return W, table, twistmod.verify(W, table)


def cmd_verify(cfg, args) -> int:
    W, table, rep = _verified(cfg)
    if rep is None:
        return _partial_notice(W, table, cfg)
    dec = rep.left if args.side == "left" else rep.two
    dist = None
    if args.distinguished:
        dist = cellmod.distinguished(W, table, rep.left) if dec is rep.left else None
    st = cellmod.stats(rep.left, rep.two, rep)
    if cfg.fmt == "dot":
        text = emit_dot(dec, rep)
    else:
        text = emit_table(contents_rows(dec, rep, dist), cfg.fmt, _meta(cfg, dec, st))
    write_output(text, cfg.output)
    for v in rep.violations:
        print(f"violation: {v}", file=sys.stderr)
    problems = cellmod.incomparable_left_cells(rep.left, rep.two)
    for v in problems:
        print(f"violation: {v}", file=sys.stderr)
    return 0 if rep.all_ok and not problems else 1


def cmd_full(cfg, args) -> int:
    W, table, rep = _verified(cfg)
    if rep is None:
        lines = []
        for w in sorted(table.domain_indices):
            try:
                lines.append(f"{W[w]}\t{twistmod.full_twist_diagonal(W, table, W[w]).format()}")
            except HeckeError as exc:
                lines.append(f"{W[w]}\tnot covered: {exc}")
        write_output("\n".join(lines) + "\n", cfg.output)
        return 2
    checks = twistmod.full_check(W, table, rep)
    lines = ["element\tx\tok\tdetails"]
    for c, d in zip(checks, rep.data):
        lines.append(f"{c.element}\t{'' if d.x is None else d.x}\t{'ok' if c.ok else 'FAIL'}\t{c.details}")
    write_output("\n".join(lines) + "\n", cfg.output)
    return 0 if all(c.ok for c in checks) and rep.all_ok else 1


def cmd_distinguished(cfg, args) -> int:
    W = _system(cfg)
    table = _table(cfg, W)
    dec = cellmod.cell_partition(W, table, "left")
    res = cellmod.distinguished(W, table, dec)
    if cfg.fmt == "json":
        doc = [{"cell": r.cell, "label": r.label, "winners": [str(w) for w in r.winners],
                "conforming": r.conforming,
                "candidates": [{"element": str(c.element), "lhs": c.lhs, "rhs": c.rhs} for c in r.candidates]}
               for r in res]
        text = json.dumps({"type": cfg.type, "p": cfg.p, "cells": doc}, indent=1) + "\n"
    else:
        lines = ["label\twinners\tconforming\tcandidates(-val mu, val h)"]
        for r in res:
            cand = ", ".join(f"{c.element}:{c.lhs if c.lhs is not None else '-'}/{c.rhs}" for c in r.candidates)
            lines.append(f"{plain_label(dec, r.cell)}\t{', '.join(str(w) for w in r.winners)}\t"
                         f"{'yes' if r.conforming else 'NO'}\t{cand}")
        text = "\n".join(lines) + "\n"
    write_output(text, cfg.output)
    return 0 if all(r.conforming for r in res) else 1


def cmd_afn(cfg, args) -> int:
    W = _system(cfg)
    table = _table(cfg, W)
    a = cellmod.a_function_all(W, table, allow_large=cfg.allow_large)
    lines = ["element\ta"] + [f"{W[w]}\t{int(a[w])}" for w in range(W.order)]
    status = 0
    if cfg.p == 0:
        two = cellmod.cell_partition(W, table, "two-sided")
        for i, members in enumerate(two.cells):
            if len({int(a[w]) for w in members}) != 1:
                print(f"violation: a not constant on {two.label(i)}", file=sys.stderr)
                status = 1
    write_output("\n".join(lines) + "\n", cfg.output)
    return status


def cmd_diff(cfg, args) -> int:
    W = _system(cfg)
    table = _table(cfg, W)
    dec0 = cellmod.cell_partition(W, None, args.side)
    decp = cellmod.cell_partition(W, table, args.side)
    rep = cellmod.diff(dec0, decp)
    if cfg.fmt == "json":
        text = json.dumps({"type": cfg.type, "p": cfg.p, "side": args.side,
                           "splits": [{"cell": c, "parts": parts} for c, parts in rep.splits],
                           "migrations": [{"element": e, "from": a, "to": b} for e, a, b in rep.migrations],
                           "order_only_p0": [list(x) for x in rep.only_in_first],
                           "order_only_p": [list(x) for x in rep.only_in_second]}, indent=1) + "\n"
    else:
        lines = []
        for c, parts in rep.splits:
            lines.append(f"split\t{c}\t" + " | ".join(", ".join(g) for g in parts))
        for e, a, b in rep.migrations:
            lines.append(f"migrate\t{e}\t{a} -> {b}")
        for a, b in rep.only_in_first:
            lines.append(f"order-p0-only\t{a} < {b}")
        for a, b in rep.only_in_second:
            lines.append(f"order-p-only\t{a} < {b}")
        text = "\n".join(lines) + ("\n" if lines else "")
    write_output(text, cfg.output)
    return 0


def cmd_stats(cfg, args) -> int:
    W, table, rep = _verified(cfg)
    if rep is None:
        return _partial_notice(W, table, cfg)
    st = cellmod.stats(rep.left, rep.two, rep)
    if cfg.fmt == "json":
        text = json.dumps({"type": cfg.type, "p": cfg.p, "stats": st._asdict()}, indent=1) + "\n"
    else:
        text = "type\tp\tleft\ttwo_sided\tunique_pairs\tfixed\tmoving\n" + \
            "\t".join(str(v) for v in (cfg.type, cfg.p, *st)) + "\n"
    write_output(text, cfg.output)
    return 0 if rep.all_ok else 1


def cmd_dot(cfg, args) -> int:
    W, table, rep = _verified(cfg)
    if rep is None:
        return _partial_notice(W, table, cfg)
    dec = rep.left if args.side == "left" else rep.two
    write_output(emit_dot(dec, rep), cfg.output)
    return 0 if rep.all_ok else 1


def cmd_kl_cache(cfg, args) -> int:
    W = build(cfg.type)
    if len(W.generators()) >= 5 and not cfg.allow_large:
        raise UsageError(f"{cfg.type} has rank >= 5; pass --allow-large to run it anyway")
    base = cfg.cache_dir or Path(".")
    path = cfg.output or base / f"{W.label}.klcache"
    if args.action == "build":
        table = kl_table(W)
        cache_save(table, path)
        print(f"wrote {path} ({W.order} rows)", file=sys.stderr)
        return 0
    table = cache_load(path, W, validate=False)
    rows = None if not args.full else range(W.order)
    problems = validate_kl(table, bar_rows=rows)
    if problems:
        text = Path(path).read_text().splitlines()
        for msg in problems:
            word = msg.split(":", 1)[0]
            lineno = next((n for n, l in enumerate(text, 1) if l.split(":", 1)[0].strip() == word), None)
            where = f"{path}:{lineno}" if lineno else str(path)
            print(f"{where}: {msg}", file=sys.stderr)
        return 2
    print(f"{path}: ok ({W.order} rows)", file=sys.stderr)
    return 0


def cmd_pcan(cfg, args) -> int:
    W = build(cfg.type)
    table = pcan.loads(W, Path(args.file).read_text(), source=args.file, check=False)
    problems = pcan.validate(table)
    for msg in problems:
        print(f"{args.file}: {msg}", file=sys.stderr)
    if not problems:
        print(f"{args.file}: ok ({table!r})", file=sys.stderr)
    return 1 if problems else 0


# -- argument parsing -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcells", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"pcells {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--type", required=True, help="Cartan type, e.g. C3, D4, F4")
    common.add_argument("--p", type=int, default=0, help="characteristic (0 = KL basis)")
    common.add_argument("--pcan", default=None,
                        help="p-canonical source: builtin, identity, or a table file")
    common.add_argument("--cache-dir", type=Path, default=None,
                        help=f"KL cache directory (default ${CACHE_ENV})")
    common.add_argument("--format", dest="fmt", choices=("tsv", "json", "dot"), default="tsv")
    common.add_argument("-o", "--output", type=Path, default=None)
    common.add_argument("--allow-large", action="store_true", help="permit rank >= 5")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add("cells", cmd_cells, "cell partition and Hasse diagram")
    sp.add_argument("--side", choices=cellmod.SIDES, default="two-sided")
    sp = add("verify-twist", cmd_verify, "half-twist eigenvalues and checks")
    sp.add_argument("--side", choices=("left", "two-sided"), default="left")
    sp.add_argument("--distinguished", action="store_true", help="also evaluate distinguished involutions")
    add("full-twist", cmd_full, "full-twist cross-check")
    add("distinguished", cmd_distinguished, "distinguished-involution sweep over left cells")
    add("afn", cmd_afn, "a-function on all elements (rank <= 3 unless --allow-large)")
    sp = add("diff", cmd_diff, "compare p-cells with 0-cells")
    sp.add_argument("--side", choices=cellmod.SIDES, default="left")
    add("stats", cmd_stats, "statistics row: left, two-sided, unique (x,sign), fixed, moving")
    sp = add("export-dot", cmd_dot, "DOT graph of cells with eigenvalues")
    sp.add_argument("--side", choices=("left", "two-sided"), default="two-sided")
    sp = add("kl-cache", cmd_kl_cache, "build or check a KL cache file")
    sp.add_argument("action", choices=("build", "check"))
    sp.add_argument("--full", action="store_true", help="check bar-invariance on every row")
    sp = add("pcan", cmd_pcan, "p-canonical table utilities")
    sp.add_argument("action", choices=("validate",))
    sp.add_argument("file")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cache_dir = args.cache_dir or (Path(os.environ[CACHE_ENV]) if os.environ.get(CACHE_ENV) else None)
    source = args.pcan or ("identity" if args.p == 0 else "builtin")
    cfg = RunConfig(args.type, args.p, source, cache_dir, args.fmt, args.output, args.allow_large)
    try:
        return args.func(cfg, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pcells: error: {exc}", file=sys.stderr)
        return 2
    except (CoxeterError, HeckeError, OSError, ValueError) as exc:
        print(f"pcells: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
