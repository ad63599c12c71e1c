"""Integer Laurent polynomials in one variable ``v``.

Coefficients are Python ints, so there is no overflow.  Terms are stored
sparsely as an exponent -> coefficient map with no zero coefficients.

>>> f = LaurentPoly.parse("v^-1+v")
>>> f * f
LaurentPoly('v^-2+2+v^2')
>>> f.bar() == f
True
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional


class PolyParseError(ValueError):
    """Raised on malformed polynomial text; ``pos`` is the offending offset."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class SignedMonomial(NamedTuple):
    sign: int
    exponent: int


class Classification(NamedTuple):
    is_selfdual: bool
    signed_monomial: Optional[SignedMonomial]


class LaurentPoly:
    """An immutable element of Z[v, v^-1]."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[int, int] = {}
        for e, c in items:
            c = clean.get(int(e), 0) + int(c)
            if c:
                clean[int(e)] = c
            else:
                clean.pop(int(e), None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, int]) -> "LaurentPoly":
        # terms already free of zeros
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1) -> "LaurentPoly":
        return cls._raw({exponent: coeff} if coeff else {})

    @classmethod
    def const(cls, c: int) -> "LaurentPoly":
        return cls.monomial(0, c)

    # -- container protocol -------------------------------------------------

    @property
    def terms(self) -> dict[int, int]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self._terms.items()))

    def coeff(self, exponent: int) -> int:
        return self._terms.get(exponent, 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "LaurentPoly":
        if isinstance(x, LaurentPoly):
            return x
        if isinstance(x, int):
            return LaurentPoly.const(x)
        raise TypeError(f"cannot use {type(x).__name__} as a Laurent polynomial")

    def __add__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            c += out.get(e, 0)
            if c:
                out[e] = c
            else:
                del out[e]
        return LaurentPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        out: dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly._raw({e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            if len(self._terms) == 1:
                (e, c), = self._terms.items()
                if c in (1, -1):
                    return LaurentPoly._raw({e * n: c ** (-n)})
            raise ValueError("only units ±v^k can be inverted")
        result = LaurentPoly.const(1)
        for _ in range(n):
            result = result * self
        return result

    def scale(self, c: int) -> "LaurentPoly":
        if not c:
            return ZERO
        return LaurentPoly._raw({e: c * a for e, a in self._terms.items()})

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by the monomial v^k."""
        return LaurentPoly._raw({e + k: c for e, c in self._terms.items()})

    def bar(self) -> "LaurentPoly":
        """The involution v -> v^-1."""
        return LaurentPoly._raw({-e: c for e, c in self._terms.items()})

    # -- statistics ---------------------------------------------------------

    def val(self) -> int:
        """Smallest exponent with nonzero coefficient.

        >>> LaurentPoly.parse("2v^-1+3v").val()
        -1
        """
        if not self._terms:
            raise ValueError("valuation of the zero polynomial is undefined")
        return min(self._terms)

    def deg(self) -> int:
        if not self._terms:
            raise ValueError("degree of the zero polynomial is undefined")
        return max(self._terms)

    def is_selfdual(self) -> bool:
        return all(self._terms.get(-e) == c for e, c in self._terms.items())

    def is_nonnegative(self) -> bool:
        return all(c > 0 for c in self._terms.values())

    def signed_monomial(self) -> Optional[SignedMonomial]:
        if len(self._terms) != 1:
            return None
        (e, c), = self._terms.items()
        if c not in (1, -1):
            return None
        return SignedMonomial(c, e)

    def classify(self) -> Classification:
        return Classification(self.is_selfdual(), self.signed_monomial())

    def evaluate(self, x):
        return sum(c * x**e for e, c in self._terms.items())

    # -- text ---------------------------------------------------------------

    def format(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in sorted(self._terms.items()):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if e == 0:
                body = str(a)
            else:
                body = ("" if a == 1 else str(a)) + ("v" if e == 1 else f"v^{e}")
            parts.append(sign + body)
        text = "".join(parts)
        return text[1:] if text[0] == "+" else text

    __str__ = format

    def __repr__(self) -> str:
        return f"LaurentPoly({self.format()!r})"

    @classmethod
    def parse(cls, text: str) -> "LaurentPoly":
        return parse(text)


ZERO = LaurentPoly._raw({})
ONE = LaurentPoly._raw({0: 1})
V = LaurentPoly._raw({1: 1})
V_INV = LaurentPoly._raw({-1: 1})

_TERM = re.compile(r"(\d+)?(v(\^([+-]?\d+))?)?")


def parse(text: str) -> LaurentPoly:
    """Parse the polynomial grammar used by the table and cache files.

    >>> parse("-3v^-4+2").terms
    {-4: -3, 0: 2}
    >>> parse("0").is_zero()
    True
    """
    # positions are reported against the original text, so track offsets
    chars = [(i, ch) for i, ch in enumerate(text) if not ch.isspace()]
    s = "".join(ch for _, ch in chars)
    origin = [i for i, _ in chars] + [len(text)]
    if not s:
        raise PolyParseError("empty polynomial", text, 0)
    terms: dict[int, int] = {}
    pos = 0
    first = True
    while pos < len(s):
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise PolyParseError("expected '+' or '-'", text, origin[pos])
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise PolyParseError("expected a term", text, origin[pos])
        if m.end() < len(s) and s[m.end()] == "^":
            raise PolyParseError("expected an exponent", text, origin[m.end() + 1])
        digits, vpart, _, exp = m.groups()
        coeff = int(digits) if digits is not None else 1
        e = 0 if vpart is None else (int(exp) if exp is not None else 1)
        terms[e] = terms.get(e, 0) + sign * coeff
        pos = m.end()
        first = False
    return LaurentPoly(terms)
