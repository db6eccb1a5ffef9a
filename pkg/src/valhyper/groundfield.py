"""Truncated multivariate Laurent series over Q or F_p with value group Z^n
(lex, first variable most significant), a rational-function parser, and the
canonical projections onto valued quotients.
"""
from __future__ import annotations

import operator
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import (
    IndistinguishableFromZero,
    InsufficientPrecision,
    ParseError,
    UnknownVariable,
    ZeroDivision,
)
from .ogroup import INF, GroupElem, Segment, leading_index, unit, zero

# ---------------------------------------------------------------- base fields


class Rationals:
    name = "Q"
    char = 0
    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def inv(a):
        if a == 0:
            raise ZeroDivision("inverse of 0 in Q")
        return 1 / Fraction(a)

    @staticmethod
    def is_zero(a) -> bool:
        return a == 0

    @staticmethod
    def eq(a, b) -> bool:
        return a == b

    @staticmethod
    def coerce(q) -> Fraction:
        return Fraction(q)

    @staticmethod
    def elements():
        return None

    @staticmethod
    def random(rng: random.Random, bound: int = 3, nonzero: bool = False) -> Fraction:
        while True:
            q = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
            if q or not nonzero:
                return q

    @staticmethod
    def fmt(a) -> str:
        return str(a)

    @staticmethod
    def canon(a):
        return a

    def __repr__(self):
        return "Q"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")


QQ = Rationals()


class PrimeField:
    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.char = p
        self.name = f"F{p}"
        self.zero = 0
        self.one = 1

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivision(f"inverse of 0 in F_{self.p}")
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def eq(self, a, b) -> bool:
        return (a - b) % self.p == 0

    def coerce(self, q) -> int:
        q = Fraction(q)
        if q.denominator % self.p == 0:
            raise ZeroDivision(f"{q} has no image in F_{self.p}")
        return q.numerator * pow(q.denominator, self.p - 2, self.p) % self.p

    def elements(self):
        return list(range(self.p))

    def random(self, rng: random.Random, bound: int = 2, nonzero: bool = False) -> int:
        lo = 1 if nonzero else 0
        return rng.randint(lo, self.p - 1)

    def fmt(self, a) -> str:
        return str(a)

    def canon(self, a):
        return a % self.p

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))


def base_field(spec: str):
    s = spec.strip().lower()
    if s in ("q", "qq"):
        return QQ
    if s.startswith("f"):
        return PrimeField(int(s[1:]))
    raise ValueError(f"unknown base field {spec!r}")


# --------------------------------------------------------------- series field

_DEFAULT_VARS = {1: ("x",), 2: ("y", "x"), 3: ("z", "y", "x")}


class SeriesField:
    """The valued field of Laurent series over ``base`` in n variables.

    ``vars`` lists variable names most significant first, so for n = 2 the
    names are (y, x) with v(y) = (1,0) and v(x) = (0,1).
    """

    def __init__(self, base, n: int, vars: tuple[str, ...] | None = None, name: str | None = None):
        self.base = base
        self.n = n
        self.vars = tuple(vars or _DEFAULT_VARS.get(n) or tuple(f"x{i + 1}" for i in range(n)))
        if len(self.vars) != n:
            raise ValueError("one name per variable")
        self.name = name or f"{base.name.lower()}{n}"
        self._zero_exp = zero(n)
        self._one = Series(self, ((self._zero_exp, base.one),), None)

    def __repr__(self):
        return f"SeriesField({self.name})"

    def __eq__(self, other):
        return isinstance(other, SeriesField) and (self.base, self.n, self.vars) == (other.base, other.n, other.vars)

    def __hash__(self):
        return hash((self.base, self.n, self.vars))

    # constructors
    def make(self, items, prec=None) -> "Series":
        F = self.base
        if isinstance(items, dict):
            items = items.items()
        if prec is None:
            kept = [(e, c) for e, c in items if not F.is_zero(c)]
        else:
            kept = [(e, c) for e, c in items if not F.is_zero(c) and e < prec]
        kept.sort(key=operator.itemgetter(0))
        return Series(self, tuple(kept), prec)

    def zero(self, prec=None) -> "Series":
        return Series(self, (), prec)

    def one(self) -> "Series":
        return self._one

    def monomial(self, e, c=None) -> "Series":
        if c is None:
            c = self.base.one
        elif isinstance(c, (int, Fraction)):
            c = self.base.coerce(c)
        if self.base.is_zero(c):
            return self.zero()
        return Series(self, ((GroupElem(e), c),), None)

    def const(self, q) -> "Series":
        return self.monomial(self._zero_exp, self.base.coerce(q))

    def var(self, name: str) -> "Series":
        if name not in self.vars:
            raise UnknownVariable(f"unknown variable {name!r}")
        return self.monomial(unit(self.n, self.vars.index(name)))


def ground_field(spec: str) -> SeriesField:
    """'q2' -> Q(x)(y) series, 'f3' -> F_3((x)), 'f5_2' -> F_5 in two variables."""
    s = spec.strip().lower()
    if "_" in s:
        b, n = s.split("_")
        return SeriesField(base_field(b), int(n), name=s)
    if s[0] == "q":
        return SeriesField(QQ, int(s[1:] or 1), name=s)
    if s[0] == "f":
        return SeriesField(base_field(s), 1, name=s)
    raise ValueError(f"unknown ground field {spec!r}")


def _pmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a <= b else b


def _addexp(a, b):
    return GroupElem(map(operator.add, a, b))


class Series:
    """Element of a SeriesField known on all exponents below ``prec``.

    ``prec is None`` means exact (finite support, no truncation).
    """

    __slots__ = ("K", "terms", "prec")

    def __init__(self, K: SeriesField, terms: tuple, prec=None):
        self.K = K
        self.terms = terms
        self.prec = prec

    # -- basic queries
    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def is_exact_zero(self) -> bool:
        return not self.terms and self.prec is None

    def val(self):
        if self.terms:
            return self.terms[0][0]
        if self.prec is None:
            return INF
        raise IndistinguishableFromZero(f"no terms below {self.prec!r}")

    def vlow(self):
        """Lower bound for the value: exact when terms exist."""
        if self.terms:
            return self.terms[0][0]
        return INF if self.prec is None else self.prec

    def leading(self):
        e = self.val()
        return e, self.terms[0][1]

    def coeff(self, e):
        e = GroupElem(e)
        if self.prec is not None and not e < self.prec:
            raise InsufficientPrecision(f"coefficient at {e!r} beyond precision {self.prec!r}")
        for t, c in self.terms:
            if t == e:
                return c
        return self.K.base.zero

    def as_dict(self) -> dict:
        return dict(self.terms)

    # -- arithmetic
    def _check(self, other):
        if not isinstance(other, Series) or other.K != self.K:
            raise TypeError("series from different fields")

    def __add__(self, other: "Series") -> "Series":
        self._check(other)
        F = self.K.base
        prec = _pmin(self.prec, other.prec)
        d = dict(self.terms)
        for e, c in other.terms:
            if e in d:
                d[e] = F.add(d[e], c)
            else:
                d[e] = c
        return self.K.make(d, prec)

    def __neg__(self) -> "Series":
        F = self.K.base
        return Series(self.K, tuple((e, F.neg(c)) for e, c in self.terms), self.prec)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def __mul__(self, other: "Series") -> "Series":
        self._check(other)
        if self.is_exact_zero() or other.is_exact_zero():
            return self.K.zero()
        F = self.K.base
        pa = INF if self.prec is None else self.prec
        pb = INF if other.prec is None else other.prec
        p = min(pa + other.vlow(), pb + self.vlow())
        prec = None if p is INF else p
        d: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = _addexp(e1, e2)
                if prec is not None and not e < prec:
                    continue
                c = F.mul(c1, c2)
                if e in d:
                    d[e] = F.add(d[e], c)
                else:
                    d[e] = c
        return self.K.make(d, prec)

    def scale(self, c) -> "Series":
        F = self.K.base
        return self.K.make([(e, F.mul(c, a)) for e, a in self.terms], self.prec)

    def shift(self, g) -> "Series":
        """Multiply by t^g."""
        p = None if self.prec is None else self.prec + g
        return Series(self.K, tuple((_addexp(e, g), c) for e, c in self.terms), p)

    def truncate(self, prec) -> "Series":
        if prec is None or prec is INF:
            return self
        return self.K.make(self.terms, _pmin(self.prec, prec))

    def drop_above(self, keep) -> "Series":
        """Exact series keeping only terms whose exponent satisfies ``keep``."""
        return Series(self.K, tuple((e, c) for e, c in self.terms if keep(e)), None)

    def __pow__(self, k: int) -> "Series":
        if k < 0:
            raise ValueError("use inverse() for negative powers")
        out = self.K.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self, prec) -> "Series":
        """1/self known on all exponents below ``prec`` (as far as the input allows)."""
        if not self.terms:
            if self.prec is None:
                raise ZeroDivision("inverse of exact zero")
            raise IndistinguishableFromZero("inverse of a series with no known terms")
        K, F = self.K, self.K.base
        g, c = self.terms[0]
        cinv = F.inv(c)
        if len(self.terms) == 1 and self.prec is None:
            return K.monomial(-g, cinv)
        # self = c t^g (1 - eps)
        unit_part = self.shift(-g).scale(cinv)
        eps = K.one() - unit_part
        rel = prec + g  # relative cut for the geometric series
        if self.prec is not None:
            rel = min(rel, self.prec - g)
        S = _geometric(K, eps, rel)
        return S.scale(cinv).shift(-g)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.K == other.K and self.terms == other.terms and self.prec == other.prec

    def __hash__(self):
        return hash((self.terms, self.prec))

    def agrees(self, other: "Series", upto=None) -> bool:
        """Equal on every exponent below min(upto, both precisions)."""
        p = _pmin(_pmin(self.prec, other.prec), upto)
        return (self - other).truncate(p).terms == ()

    def __repr__(self):
        return series_str(self)


def _multiple_reaching(e: GroupElem, r: GroupElem) -> int | None:
    """Least k >= 0 with k*e >= r for e > 0, or None if no multiple gets there."""
    if r <= zero(len(r)):
        return 0
    j = leading_index(e)
    head = tuple(r[:j])
    if head > (0,) * j:
        return None
    if head < (0,) * j:
        return 0
    k = max(0, -(-r[j] // e[j]))
    while k * e < r:
        k += 1
    return k


def _geometric(K: SeriesField, eps: Series, rel) -> Series:
    """sum_k eps^k known below ``rel``; eps must have positive value."""
    if not eps.terms:
        if eps.prec is None:
            return K.one().truncate(rel)
        return K.one().truncate(_pmin(rel, eps.prec))
    e = eps.val()
    if not e > zero(K.n):
        raise ValueError("geometric series needs v(eps) > 0")
    k = _multiple_reaching(e, rel)
    if k is None:
        raise InsufficientPrecision(
            f"infinitely many terms below {rel!r} (step {e!r}); choose a finer precision cut"
        )
    one = K.one().truncate(rel)
    S = one
    for _ in range(k):
        S = one + (eps * S).truncate(rel)
    return S


def series_val(a: Series):
    return a.val()


def series_str(a: Series) -> str:
    parts = []
    F = a.K.base
    for e, c in a.terms:
        parts.append(f"{F.fmt(c)}*t^({','.join(str(x) for x in e)})")
    if a.prec is not None:
        parts.append(f"O(t^({','.join(str(x) for x in a.prec)}))")
    return " + ".join(parts) if parts else "0"


def series_poly_str(a: Series) -> str:
    """Human form using the variable names, e.g. '1 + x + x^2 + O(x^3)'."""
    K = a.K

    def mono(e):
        bits = []
        for name, k in zip(K.vars, e):
            if k == 1:
                bits.append(name)
            elif k:
                bits.append(f"{name}^{k}")
        return "*".join(bits)

    out = []
    for e, c in a.terms:
        m = mono(e)
        cs = K.base.fmt(c)
        if not m:
            out.append(cs)
        elif cs == "1":
            out.append(m)
        elif cs == "-1":
            out.append("-" + m)
        else:
            out.append(f"{cs}*{m}")
    if a.prec is not None:
        m = mono(a.prec) or "1"
        out.append(f"O({m})")
    return " + ".join(out) if out else "0"


def series_json(a: Series) -> dict:
    return {
        "terms": [[list(e), a.K.base.fmt(c)] for e, c in a.terms],
        "prec": None if a.prec is None else list(a.prec),
    }


# ------------------------------------------------------------------- parser


@dataclass(frozen=True)
class Num:
    q: Fraction

    def __str__(self):
        return str(self.q)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    a: object

    def __str__(self):
        return f"Neg({self.a})"


@dataclass(frozen=True)
class Pow:
    a: object
    k: int

    def __str__(self):
        return f"Pow({self.a}, {self.k})"


@dataclass(frozen=True)
class BinOp:
    op: str
    a: object
    b: object

    _names = {"+": "Add", "-": "Sub", "*": "Mul", "/": "Div"}

    def __str__(self):
        return f"{self._names[self.op]}({self.a}, {self.b})"


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


class _Parser:
    def __init__(self, text: str, variables: Iterable[str] | None):
        self.s = text.replace("−", "-")
        self.i = 0
        self.vars = None if variables is None else set(variables)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self):
        self.ws()
        return self.s[self.i] if self.i < len(self.s) else ""

    def expect(self, ch):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.i)
        self.i += 1

    def parse(self):
        e = self.expr()
        if self.peek():
            raise ParseError(f"unexpected {self.peek()!r}", self.i)
        return e

    def expr(self):
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.s[self.i]
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.peek() in ("*", "/"):
            op = self.s[self.i]
            self.i += 1
            e = BinOp(op, e, self.factor())
        return e

    def factor(self):
        b = self.base()
        if self.peek() == "^":
            self.i += 1
            self.ws()
            start = self.i
            if self.peek() == "(":
                self.i += 1
                k = self.integer()
                self.expect(")")
            else:
                k = self.integer()
            if k is None:
                raise ParseError("expected integer exponent", start)
            return Pow(b, k)
        return b

    def integer(self):
        self.ws()
        j = self.i
        if j < len(self.s) and self.s[j] in "+-":
            j += 1
        k = j
        while k < len(self.s) and self.s[k].isdigit():
            k += 1
        if k == j:
            return None
        v = int(self.s[self.i : k])
        self.i = k
        return v

    def base(self):
        ch = self.peek()
        if not ch:
            raise ParseError("unexpected end of input", self.i)
        if ch == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch == "-":
            self.i += 1
            return Neg(self.base())
        if ch.isdigit():
            j = self.i
            while j < len(self.s) and self.s[j].isdigit():
                j += 1
            q = Fraction(int(self.s[self.i : j]))
            self.i = j
            return Num(q)
        if ch.isalpha() or ch == "_":
            j = self.i
            while j < len(self.s) and (self.s[j].isalnum() or self.s[j] == "_"):
                j += 1
            name = self.s[self.i : j]
            if self.vars is not None and name not in self.vars:
                raise UnknownVariable(f"unknown variable {name!r}", self.i)
            self.i = j
            return Var(name)
        raise ParseError(f"unexpected {ch!r}", self.i)


def parse_rf(text: str, variables: Iterable[str] | None = ("y", "x")):
    """Parse a rational-function expression into a small AST."""
    return _Parser(text, variables).parse()


def to_fraction(e, K: SeriesField) -> tuple[Series, Series]:
    """Evaluate an AST to numerator/denominator exact Laurent polynomials."""
    one = K.one()
    if isinstance(e, Num):
        return K.const(e.q), one
    if isinstance(e, Var):
        return K.var(e.name), one
    if isinstance(e, Neg):
        n, d = to_fraction(e.a, K)
        return -n, d
    if isinstance(e, Pow):
        n, d = to_fraction(e.a, K)
        if e.k < 0:
            if n.is_exact_zero():
                raise ZeroDivision("negative power of zero")
            n, d = d, n
        return n ** abs(e.k), d ** abs(e.k)
    if isinstance(e, BinOp):
        n1, d1 = to_fraction(e.a, K)
        n2, d2 = to_fraction(e.b, K)
        if e.op == "+":
            return n1 * d2 + n2 * d1, d1 * d2
        if e.op == "-":
            return n1 * d2 - n2 * d1, d1 * d2
        if e.op == "*":
            return n1 * n2, d1 * d2
        if n2.is_exact_zero():
            raise ZeroDivision("division by the zero rational function")
        return n1 * d2, d1 * n2
    raise TypeError(f"not an expression node: {e!r}")


def rf_val(e, K: SeriesField):
    n, d = to_fraction(e, K)
    if n.is_exact_zero():
        return INF
    return n.val() - d.val()


def expand(e, prec, K: SeriesField | None = None) -> Series:
    """Expand a rational function (AST or text) as a series known below prec."""
    K = K or SeriesField(QQ, 2)
    if isinstance(e, str):
        e = parse_rf(e, K.vars)
    prec = GroupElem(prec)
    n, d = to_fraction(e, K)
    if n.is_exact_zero():
        return K.zero(prec)
    inv = d.inverse(prec - n.val())
    return (n * inv).truncate(prec)


def expand_exact(e, K: SeriesField) -> Series | None:
    """The exact Laurent polynomial if the denominator is a monomial."""
    if isinstance(e, str):
        e = parse_rf(e, K.vars)
    n, d = to_fraction(e, K)
    if len(d.terms) != 1:
        return None
    e, c = d.terms[0]
    return n * K.monomial(-e, K.base.inv(c))


def theta_rho(a: Series, rho: Segment):
    """Canonical image of a in the valued quotient H_rho(K)."""
    from .hyperfield import quotient_of

    return quotient_of(a.K, rho).theta(a)
