from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcells import pcan
from pcells.coxeter import build
from pcells.engine import engine_for
from pcells.hecke import (
    KL, STANDARD, CacheError, HeckeElt, HeckeError, bar, cache_load, cache_save, change_basis,
    dump_kl, full_twist, half_twist, kl_element, kl_table, mul, std_of, unit, validate_kl,
)
from pcells.laurent import ONE, V, V_INV, LaurentPoly, parse

import oracles


def H(W, word):
    return std_of(W.canonicalize(word))


def elt(W, text, basis=STANDARD):
    """'poly*word ; ...' -> HeckeElt."""
    out = {}
    for item in text.split(";"):
        poly, word = item.strip().rsplit("*", 1)
        out[W.canonicalize(word)] = parse(poly)
    return HeckeElt(W, out, basis)


@pytest.fixture(scope="module")
def C2():
    return build("C2")


@pytest.fixture(scope="module")
def C3():
    return build("C3")


def test_quadratic_and_braid_free_products(C2):
    s, t = H(C2, "1"), H(C2, "2")
    assert mul(s, s) == unit(C2) + s.scale(V_INV - V)
    assert mul(s, t) == H(C2, "12")
    bs = s + unit(C2).scale(V)
    assert change_basis(mul(bs, bs), KL) == change_basis(bs, KL).scale(V + V_INV)
    assert std_of(C2.identity()).coeff(C2.identity()) == 1


def test_mul_rejects_mixed(C2, C3):
    with pytest.raises(HeckeError):
        mul(unit(C2), unit(C3))
    with pytest.raises(HeckeError):
        mul(change_basis(unit(C2), KL), unit(C2))


def test_bar_examples(C2):
    assert bar(unit(C2)) == unit(C2)
    s = H(C2, "1")
    assert bar(s) == s + unit(C2).scale(V - V_INV)
    with pytest.raises(HeckeError):
        bar(change_basis(s, KL))


def test_c2_kl_rows(C2):
    T = kl_table(C2)
    assert kl_element(C2.canonicalize("1")) == elt(C2, "1*1 ; v*e")
    assert T.element(C2.canonicalize("21")) == elt(C2, "1*21 ; v*2 ; v*1 ; v^2*e")
    w0 = C2.longest()
    assert T.element(w0) == HeckeElt(C2, {x: LaurentPoly.monomial(4 - x.length) for x in C2})
    for w in C2:
        b = T.element(w)
        assert bar(b) == b


@pytest.mark.parametrize("label", ["G2", "A2", "A1"])
def test_dihedral_kl_formula(label):
    # in rank <= 2 every h_{x,w} is v^(l(w) - l(x)) for x <= w
    W = build(label)
    T = kl_table(W)
    for w in W:
        want = {x: LaurentPoly.monomial(w.length - x.length) for x in W if W.bruhat_leq(x, w)}
        assert T.element(w) == HeckeElt(W, want)


@pytest.mark.parametrize("label", ["C3", "B3", "A3", "G2"])
def test_kl_table_matches_exact_recursion(label):
    W = build(label)
    ref = oracles.kl_exact(W)
    T = kl_table(W)
    for w in W:
        assert T.element(w) == ref[w.index]


@pytest.mark.parametrize("label", ["A1", "A2", "C2", "G2", "A3", "B3", "C3"])
def test_kl_exhaustive_rank3(label):
    W = build(label)
    assert validate_kl(kl_table(W), bar_rows=range(W.order)) == []


@pytest.mark.parametrize("label", ["D4", "C4", "F4"])
def test_kl_sampled_rank4(label):
    W = build(label)
    T = kl_table(W)
    rng = random.Random(7)
    rows = [w for w in range(W.order) if W.lengths[w] <= 3]
    rows += rng.sample(range(W.order), 2) if label != "F4" else []
    assert validate_kl(T, bar_rows=rows) == []


def test_associativity_random_c3(C3):
    rng = random.Random(3)
    elts = list(C3)
    polys = [ONE, V, V_INV, V + V_INV, ONE - V, 2 * V_INV]

    def rand():
        return HeckeElt(C3, {rng.choice(elts): rng.choice(polys) for _ in range(rng.randint(1, 2))})

    for _ in range(60):
        a, b, c = rand(), rand(), rand()
        assert mul(mul(a, b), c) == mul(a, mul(b, c))


@settings(max_examples=30)
@given(st.data())
def test_associativity_property_a3(data):
    W = build("A3")
    pick = st.integers(0, W.order - 1).map(lambda i: W[i])
    coef = st.sampled_from([ONE, V, V_INV, V - V_INV])
    gen = st.dictionaries(pick, coef, min_size=1, max_size=2).map(lambda d: HeckeElt(W, d))
    a, b, c = data.draw(gen), data.draw(gen), data.draw(gen)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3", "C3"])
def test_structure_constants_nonnegative(label):
    W = build(label)
    eng = engine_for(W)
    N = W.order
    for x in range(N):
        P = eng.multiply([x] * N, list(range(N)))
        assert (P.data >= 0).all()
        for y in (0, N - 1, N // 2):
            for z in P.support(y):
                assert P.poly(z, y).is_selfdual()


@pytest.mark.parametrize("label", ["A2", "C2"])
def test_engine_products_match_exact(label):
    W = build(label)
    eng = engine_for(W)
    T = kl_table(W)
    for x in W:
        P = eng.multiply([x.index] * W.order, list(range(W.order)))
        for y in W:
            exact = change_basis(mul(T.element(x), T.element(y)), KL)
            got = HeckeElt(W, {W[z]: f for z, f in P.column(y.index).items()}, KL)
            assert got == exact


def test_generator_products_are_w_graph(C3):
    T = kl_table(C3)
    for s in C3.generators():
        bs = T.element(s)
        for w in C3:
            if (s * w).length < w.length:
                continue
            prod = change_basis(mul(bs, T.element(w)), KL)
            assert prod.coeff(s * w) == 1
            for z, f in prod.items():
                assert f.is_selfdual() and f.is_nonnegative()


def test_change_basis_examples(C2):
    assert change_basis(change_basis(unit(C2), KL), STANDARD) == unit(C2)
    table = pcan.builtin(C2, 2)
    sts = C2.canonicalize("121")
    c = HeckeElt(C2, {sts: ONE}, table.tag)
    assert change_basis(c, KL, pcan=table) == elt(C2, "1*121 ; 1*1", KL)
    T = kl_table(C2)
    prod = change_basis(mul(T.element(C2.canonicalize("1")), T.element(C2.canonicalize("21"))), KL)
    assert prod == elt(C2, "1*121 ; 1*1", KL)
    assert change_basis(prod, table.tag, pcan=table) == HeckeElt(C2, {sts: ONE}, table.tag)


@settings(max_examples=40)
@given(st.data())
def test_change_basis_roundtrip(data):
    W = build("C2")
    table = pcan.builtin(W, 2)
    pick = st.integers(0, W.order - 1).map(lambda i: W[i])
    coef = st.sampled_from([ONE, V, -V_INV, V + V_INV, 3 * ONE])
    h = HeckeElt(W, data.draw(st.dictionaries(pick, coef, min_size=1, max_size=4)))
    for tag in (KL, table.tag):
        there = change_basis(h, tag, pcan=table)
        assert change_basis(there, STANDARD, pcan=table) == h


def test_partial_table_error_lists_missing(C3):
    table = pcan.builtin(C3, 2)
    h = change_basis(std_of(C3.canonicalize("1")), KL)
    with pytest.raises(HeckeError) as info:
        change_basis(h, table.tag, pcan=table)
    assert "partial table" in str(info.value)
    assert info.value.missing == ["e", "1"]


def test_twist_elements(C2):
    ht = half_twist(C2)
    assert list(ht.items()) == [(C2.longest(), ONE)]
    ft = full_twist(C2)
    for s in C2.generators():
        assert mul(ft, std_of(s)) == mul(std_of(s), ft)


def test_half_twist_on_c3(C3):
    T = kl_table(C3)
    got = change_basis(mul(half_twist(C3), T.element(C3.canonicalize("121"))), KL)
    assert got == elt(C3, "v^-3*121321323 ; -v^-2*12132132 ; v^-1*121", KL)
    got = change_basis(mul(half_twist(C3), T.element(C3.canonicalize("121321"))), KL)
    assert got == elt(C3, "v^-6*121321323 ; -v^-3*121321", KL)


def test_engine_half_twist_matches_exact(C3):
    eng = engine_for(C3)
    T = kl_table(C3)
    X = eng.half(eng.kl_of(list(range(C3.order))))
    for w in C3:
        exact = change_basis(mul(half_twist(C3), T.element(w)), KL)
        got = HeckeElt(C3, {C3[y]: f for y, f in X.column(w.index).items()}, KL)
        assert got == exact


def test_cache_roundtrip(tmp_path, C2):
    T = kl_table(C2)
    path = cache_save(T, tmp_path / "C2.klcache")
    lines = path.read_text().splitlines()
    assert lines[0] == "format klcache v1"
    assert sum(":" in l for l in lines) == 8
    loaded = cache_load(path, C2)
    for w in C2:
        assert loaded.element(w) == T.element(w)
    assert dump_kl(loaded).split("\n", 5)[5] == dump_kl(T).split("\n", 5)[5]


def test_cache_rejects_wrong_type(tmp_path, C2):
    path = cache_save(kl_table(C2), tmp_path / "C2.klcache")
    with pytest.raises(CacheError, match="type"):
        cache_load(path, build("G2"))


def test_cache_rejects_version_and_checksum(tmp_path, C2):
    path = cache_save(kl_table(C2), tmp_path / "C2.klcache")
    text = path.read_text()
    path.write_text(text.replace("klcache v1", "klcache v9"))
    with pytest.raises(CacheError, match="version"):
        cache_load(path)
    path.write_text(text.replace("v^2*e", "2v^2*e", 1))
    with pytest.raises(CacheError, match="checksum"):
        cache_load(path)


def _strip_checksum(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("checksum")) + "\n"


def test_cache_tamper_caught_by_validation(tmp_path):
    W = build("C3")
    path = cache_save(kl_table(W), tmp_path / "C3.klcache")
    text = _strip_checksum(path.read_text())
    # drop the diagonal-adjacent coefficient: unitriangularity scan must flag it
    bad = text.replace("121 : v^3*e ; v^2*1 ; v^2*2 ; v*12 ; v*21 ; 1*121",
                       "121 : v^3*e ; v^2*1 ; v^2*2 ; v*12 ; v^2*21 ; 1*121")
    assert bad != text
    path.write_text(bad)
    with pytest.raises(CacheError, match="validation"):
        cache_load(path, W)
    # a constant off-diagonal term
    path.write_text(text.replace("1 : v*e ; 1*1", "1 : 1*e ; 1*1"))
    with pytest.raises(CacheError, match="vZ"):
        cache_load(path, W)


def test_cache_bar_failure_detected(tmp_path):
    # a coefficient change that keeps the degree/parity shape must still be caught
    W = build("C3")
    path = cache_save(kl_table(W), tmp_path / "C3.klcache")
    text = _strip_checksum(path.read_text())
    line = next(l for l in text.splitlines() if l.startswith("121 :"))
    path.write_text(text.replace(line, line.replace("v^3*e", "2v^3*e")))
    with pytest.raises(CacheError, match="bar"):
        cache_load(path, W)
