"""The Hahn field over an RV-sort: series sum_g a_g t^g where the coefficient
a_g is an element of the sort of value g.

Supports are finite lists of exponents below a precision cut ``prec`` (the
first exponent not known).  ``prec is None`` means the series is exact.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from .errors import (
    IndistinguishableFromZero,
    InsufficientPrecision,
    MixedSorts,
    NewtonConditionFails,
    ParseError,
    ZeroDivision,
)
from .groundfield import BinOp, Neg, Num, Pow, Var, _Parser
from .hyperfield import Report, Sampled, Scope, _Acc
from .ogroup import INF, GroupElem, last_unit, unit, zero as gzero
from .rvsort import RVSort, SequenceStructure, oplus_n, sequence_structure


def _pmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _shift(p, g):
    return None if p is None else p + g


class HahnSeries:
    __slots__ = ("H", "terms", "prec")

    def __init__(self, H: "HahnField", terms: tuple, prec=None):
        self.H = H
        self.terms = terms
        self.prec = prec

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def is_exact_zero(self) -> bool:
        return not self.terms and self.prec is None

    def coeff(self, g):
        for e, c in self.terms:
            if e == g:
                return c
        return self.H.R.zero

    def exponents(self):
        return [e for e, _ in self.terms]

    def truncate(self, prec) -> "HahnSeries":
        prec = _pmin(self.prec, prec)
        if prec is None:
            return self
        return HahnSeries(self.H, tuple(t for t in self.terms if t[0] < prec), prec)

    def exact_part(self) -> "HahnSeries":
        return HahnSeries(self.H, self.terms, None)

    def __add__(self, other):
        return hs_add(self, other)

    def __sub__(self, other):
        return hs_add(self, -other)

    def __neg__(self):
        R = self.H.R
        return HahnSeries(self.H, tuple((e, R.neg(c)) for e, c in self.terms), self.prec)

    def __mul__(self, other):
        return hs_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, HahnSeries):
            return NotImplemented
        return self.H is other.H and self.prec == other.prec and self.terms == other.terms

    def __hash__(self):
        return hash((tuple(e for e, _ in self.terms), self.prec))

    def agrees_below(self, other: "HahnSeries", bound) -> bool:
        """Same coefficients at every exponent < bound (both must know them)."""
        for s in (self, other):
            if s.prec is not None and s.prec < bound:
                raise InsufficientPrecision(f"series known only below {s.prec!r}")
        a = [t for t in self.terms if t[0] < bound]
        b = [t for t in other.terms if t[0] < bound]
        return a == b

    def __repr__(self):
        return fmt_sparse(self)


class HahnField:
    """H^(Gamma) for an RV-sort R with value group Z^n (n = R.n)."""

    def __init__(self, R: RVSort, name: str | None = None):
        self.R = R
        self.n = R.n
        self.name = name or f"Hahn[{R.hid}]"
        self.zero = HahnSeries(self, ())
        self.one = self.monomial(R.one)

    def __repr__(self):
        return self.name

    @property
    def eps(self) -> GroupElem:
        """Smallest positive exponent; cuts 'g + eps' mean 'everything <= g is known'."""
        return last_unit(self.n)

    def make(self, items, prec=None) -> HahnSeries:
        R = self.R
        acc = {}
        for e, c in items:
            if R.is_zero(c):
                continue
            e = GroupElem(e)
            if R.val(c) != e:
                raise ValueError(f"coefficient {R.fmt(c)} does not have value {e!r}")
            if e in acc:
                raise ValueError(f"exponent {e!r} given twice")
            acc[e] = c
        if prec is not None:
            prec = GroupElem(prec)
        terms = tuple(sorted((t for t in acc.items() if prec is None or t[0] < prec), key=lambda t: t[0]))
        return HahnSeries(self, terms, prec)

    def monomial(self, c, prec=None) -> HahnSeries:
        R = self.R
        if R.is_zero(c):
            return HahnSeries(self, (), prec)
        return self.make([(R.val(c), c)], prec)

    def t(self, g) -> HahnSeries:
        return self.monomial(self.R.monomial(GroupElem(g)))

    def const(self, q) -> HahnSeries:
        R = self.R
        if not isinstance(R, SequenceStructure):
            raise TypeError("constants need a sort with a coefficient field")
        return self.monomial(R.iota(R.F.coerce(q)))

    def integer(self, k: int) -> HahnSeries:
        """k * 1 by repeated addition (works over any sort)."""
        acc = self.zero
        u = self.one if k >= 0 else -self.one
        for _ in range(abs(k)):
            acc = acc + u
        return acc

    def own(self, *xs):
        for x in xs:
            if x.H is not self:
                raise MixedSorts(f"series from {x.H.name} used in {self.name}")

    def sample(self, rng: random.Random, length: int = 3, width: int = 2, exact: bool = True) -> HahnSeries:
        """Random series with up to ``length`` terms, exponent coordinates in [-width, width]."""
        R = self.R
        k = rng.randint(1, length)
        exps = {GroupElem(rng.randint(-width, width) for _ in range(self.n)) for _ in range(k)}
        items = [(e, R.sample_at(e, rng)) for e in exps]
        return self.make(items)


# ------------------------------------------------------------------ arithmetic


def hs_add(a: HahnSeries, b: HahnSeries) -> HahnSeries:
    H = a.H
    H.own(b)
    R = H.R
    acc = dict(a.terms)
    for e, c in b.terms:
        if e in acc:
            s = R.oplus(acc[e], c)
            if R.is_zero(s):
                del acc[e]
            else:
                acc[e] = s
        else:
            acc[e] = c
    prec = _pmin(a.prec, b.prec)
    terms = tuple(sorted((t for t in acc.items() if prec is None or t[0] < prec), key=lambda t: t[0]))
    return HahnSeries(H, terms, prec)


def _vlow(a: HahnSeries):
    """v(a) if known, else the lower bound prec."""
    if a.terms:
        return a.terms[0][0]
    return INF if a.prec is None else a.prec


def hs_mul(a: HahnSeries, b: HahnSeries) -> HahnSeries:
    H = a.H
    H.own(b)
    R = H.R
    if a.is_exact_zero() or b.is_exact_zero():
        return H.zero
    va, vb = _vlow(a), _vlow(b)
    prec = _pmin(_shift(a.prec, vb), _shift(b.prec, va))
    buckets: dict = {}
    for d, x in a.terms:
        for e, y in b.terms:
            g = d + e
            if prec is not None and not g < prec:
                continue
            buckets.setdefault(g, []).append(R.mul(x, y))
    out = []
    for g in sorted(buckets):
        # every summand has value g, so the n-ary sum does not depend on brackets
        s = oplus_n(R, buckets[g])
        if not R.is_zero(s):
            out.append((g, s))
    return HahnSeries(H, tuple(out), prec)


def hs_val(a: HahnSeries):
    if a.terms:
        return a.terms[0][0]
    if a.prec is None:
        return INF
    raise IndistinguishableFromZero(f"no nonzero term below {a.prec!r}")


def rv_project(a: HahnSeries):
    """Leading coefficient a_{v(a)}: the image of a in H_{0}(H^(Gamma))."""
    if a.is_exact_zero():
        return a.H.R.zero
    hs_val(a)
    return a.terms[0][1]


# -------------------------------------------------------------------- inverse


def _refine(a, b, li, sign):
    c = a.H.one - a * b
    lead = c.terms[0][1]
    corr = a.H.monomial(a.H.R.mul(lead, li))
    return b + corr if sign > 0 else b - corr


@lru_cache(maxsize=None)
def refinement_sign() -> int:
    """Sign of the correction term, chosen on a = 1 - t over (Q, Z).

    Whichever sign makes v(1 - a*b) grow is adopted for every sort.
    """
    H = HahnField(sequence_structure("q,z"))
    a = H.one - H.t((1,))
    b = H.one
    v0 = hs_val(H.one - a * b)
    li = H.R.inv(rv_project(a))
    gains = {}
    for sign in (1, -1):
        c = H.one - a * _refine(a, b, li, sign)
        gains[sign] = INF if c.is_exact_zero() else hs_val(c)
    good = [s for s in (1, -1) if gains[s] > v0]
    if len(good) != 1:
        raise AssertionError(f"sign probe is inconclusive: {gains}")
    return good[0]


def hs_inverse(a: HahnSeries, target, trace: list | None = None, max_steps: int = 10000) -> HahnSeries:
    """b with v(1 - a*b) > target, known at every exponent <= target - v(a).

    Starts from the inverse of the leading term and adds one monomial per
    step, built from the leading coefficient of c = 1 - a*b.
    """
    H = a.H
    R = H.R
    if a.is_exact_zero():
        raise ZeroDivision("inverse of 0")
    va = hs_val(a)
    target = GroupElem(target)
    if a.prec is not None and not target + va < a.prec:
        raise InsufficientPrecision(f"a is known below {a.prec!r}; inverse to {target!r} needs more than {target + va!r}")
    li = R.inv(rv_project(a))
    b = H.monomial(li)
    sign = refinement_sign()
    for _ in range(max_steps):
        c = H.one - a * b
        if c.is_exact_zero():
            return b
        if not c.terms:
            if c.prec > target:
                break
            raise InsufficientPrecision(f"1 - a*b is known only below {c.prec!r}")
        vc = c.terms[0][0]
        if vc > target:
            break
        if trace is not None:
            trace.append(vc)
        corr = H.monomial(R.mul(c.terms[0][1], li))
        b = b + corr if sign > 0 else b - corr
    else:
        raise InsufficientPrecision(f"no convergence to {target!r} after {max_steps} steps")
    return HahnSeries(H, b.terms, target - va + H.eps)


def hs_div(a: HahnSeries, b: HahnSeries, prec) -> HahnSeries:
    """a / b known below prec."""
    if a.is_exact_zero():
        return a
    prec = GroupElem(prec)
    vb = hs_val(b)
    # a * b^-1 is known below prec(b^-1) + v(a); b^-1 to exponent T - v(b)
    tgt = prec - hs_val(a) + vb - a.H.eps
    return (a * hs_inverse(b, tgt)).truncate(prec)


# ----------------------------------------------------------- Hensel lifting


def poly_eval(f: list, r: HahnSeries) -> HahnSeries:
    H = r.H
    acc = H.zero
    for c in reversed(f):
        acc = acc * r + c
    return acc


def poly_deriv(f: list, H: HahnField) -> list:
    return [H.integer(i) * c for i, c in enumerate(f)][1:]


def hensel_lift(f: list, r0: HahnSeries, target, max_steps: int = 64) -> HahnSeries:
    """Root of f = sum_i f[i] X^i near r0, correct at every exponent <= target.

    Needs v(f(r0)) > 2 v(f'(r0)).
    """
    H = r0.H
    target = GroupElem(target)
    df = poly_deriv(f, H)
    fr, dfr = poly_eval(f, r0), poly_eval(df, r0)
    v0, d0 = hs_val(fr), hs_val(dfr)
    if not (v0 is INF or (d0 is not INF and v0 > 2 * d0)):
        raise NewtonConditionFails(f"v(f(r0)) = {v0!r} is not above 2 v(f'(r0)) = {'inf' if d0 is INF else repr(2 * d0)}")
    r = r0
    for _ in range(max_steps):
        fr = poly_eval(f, r)
        if fr.is_exact_zero():
            return r
        dfr = poly_eval(df, r)
        vf, vd = hs_val(fr), hs_val(dfr)
        # Newton: the root is within v(f(r)) - v(f'(r)) of r
        if vf - vd > target:
            return HahnSeries(H, tuple(t for t in r.terms if t[0] <= target), target + H.eps)
        inv = hs_inverse(dfr, target + vd - vf)
        step = (fr * inv).exact_part()
        r = HahnSeries(H, tuple(t for t in (r - step).terms if t[0] <= target), None)
    raise InsufficientPrecision(f"Newton iteration did not reach {target!r}")


def sqrt_series(a: HahnSeries, target, r0: HahnSeries | None = None) -> HahnSeries:
    H = a.H
    return hensel_lift([-a, H.zero, H.one], r0 if r0 is not None else H.one, target)


# ------------------------------------------------------- round-trip check


def _sum_member(R, a, b, z) -> bool:
    """z in a [+] b for a sequence structure or a handle sort."""
    if isinstance(R, SequenceStructure):
        S = R.boxplus(a, b)
        if S.kind == "singleton":
            return S.witness == z
        # zero ball: 0 and everything of value above the floor
        return R.is_zero(z) or S.cut.exceeded_by(R.val(z))
    return R.H.member(R.H.add(a, b), z)


def _perturb(H: HahnField, a: HahnSeries, rng, above) -> HahnSeries:
    """a plus a random monomial of exponent strictly above ``above``."""
    R = H.R
    g = above + GroupElem(rng.randint(0, 2) for _ in range(H.n)) + H.eps
    if not g > above:
        g = above + H.eps
    return a + H.monomial(R.sample_at(g, rng))


def sample_pairs(H: HahnField, rng, k: int):
    """Pairs mixing independent series, cancellations and perturbations."""
    out = []
    for _ in range(k):
        a = H.sample(rng)
        r = rng.random()
        if r < 0.35:
            b = H.sample(rng)
        elif r < 0.55:
            b = -a
        elif r < 0.8:
            b = _perturb(H, -a, rng, hs_val(a))
        else:
            b = _perturb(H, H.zero, rng, hs_val(a))
        out.append((a, b))
    return out


def check_rv_round_trip(R: RVSort, scope: Scope = Sampled(200)) -> list[Report]:
    """rv: H^(Gamma) -> R is multiplicative, sends a+b into rv(a) [+] rv(b),
    and induces a bijection from H_{0}(H^(Gamma)) onto R (sampled)."""
    H = HahnField(R)
    names = ["rv multiplicative", "rv sum", "rv injective", "rv surjective"]
    acc = _Acc(names, scope.seed)
    rng = random.Random(scope.seed)
    f = R.fmt
    for a, b in sample_pairs(H, rng, scope.n):
        ra, rb = rv_project(a), rv_project(b)
        rab = rv_project(a * b)
        acc.check("rv multiplicative", rab == R.mul(ra, rb), lambda: {"a": repr(a), "b": repr(b), "rv(ab)": f(rab)})
        s = a + b
        rs = rv_project(s)
        acc.check("rv sum", _sum_member(R, ra, rb, rs), lambda: {"a": repr(a), "b": repr(b), "rv(a+b)": f(rs)})
        # classes of a(1 + m_0): rv(a) = rv(a') iff v(a - a') > v(a)
        for a2 in (_perturb(H, a, rng, hs_val(a)), a + b, a * H.monomial(R.sample_F(rng))):
            if a2.is_exact_zero():
                continue
            same = rv_project(a2) == ra
            d = a - a2
            close = d.is_exact_zero() or hs_val(d) > hs_val(a)
            acc.check("rv injective", same == close, lambda: {"a": repr(a), "a'": repr(a2)})
    for _ in range(scope.n):
        r = R.sample(rng, nonzero=True)
        acc.check("rv surjective", rv_project(H.monomial(r)) == r, lambda: {"r": f(r)})
    return acc.out()


# ----------------------------------------------------------------- text I/O


def _exp_str(g: GroupElem) -> str:
    return str(g[0]) if len(g) == 1 else "(" + ",".join(str(c) for c in g) + ")"


def fmt_sparse(a: HahnSeries) -> str:
    """'(f;g)*t^g + ... + O(t^p)'."""
    R = a.H.R
    parts = [f"{R.fmt(c).replace(' ', '')}*t^{_exp_str(e)}" for e, c in a.terms]
    if a.prec is not None:
        parts.append(f"O(t^{_exp_str(a.prec)})")
    return " + ".join(parts) if parts else "0"


def fmt_poly(a: HahnSeries) -> str:
    """'1 + t + t^2 + O(t^4)' for sorts with a coefficient field."""
    R = a.H.R
    if not isinstance(R, SequenceStructure):
        return fmt_sparse(a)
    zero = gzero(a.H.n)

    def mono(e):
        if e == zero:
            return ""
        if e == a.H.eps:
            return "t"
        return f"t^{_exp_str(e)}"

    out = []
    for e, c in a.terms:
        cs, m = R.F.fmt(c.f), mono(e)
        if not m:
            term = cs
        elif cs == "1":
            term = m
        elif cs == "-1":
            term = "-" + m
        else:
            term = f"{cs}*{m}"
        if out and term.startswith("-"):
            out.append("- " + term[1:])
        else:
            out.append(("+ " if out else "") + term)
    if a.prec is not None:
        out.append(("+ " if out else "") + f"O({mono(a.prec) or '1'})")
    return " ".join(out) if out else "0"


def to_json(a: HahnSeries) -> dict:
    R = a.H.R
    return {
        "terms": [[list(e), R.fmt(c)] for e, c in a.terms],
        "prec": None if a.prec is None else list(a.prec),
    }


def from_json(H: HahnField, d: dict) -> HahnSeries:
    """Inverse of to_json for sorts with a coefficient field."""
    R = H.R
    items = []
    for e, c in d["terms"]:
        s = c.strip()
        if s.startswith("("):
            s = s[1:].split(";")[0]
        items.append((e, R.make(R.F.coerce(Fraction(s)), e)))
    return H.make(items, d.get("prec"))


# ---------------------------------------------------------- expressions


def _basis_vars(n: int) -> dict:
    out = {"t": last_unit(n)} if n else {}
    for i in range(n):
        out[f"t{i}"] = unit(n, i)
    return out


def eval_expr(text: str, H: HahnField, prec) -> HahnSeries:
    """Evaluate +, -, *, /, ^ over t (smallest positive exponent) and t0..t{n-1}.

    Division and negative powers are expanded below ``prec``; exact inputs
    stay exact otherwise.
    """
    vars_ = _basis_vars(H.n)
    ast = _Parser(text, vars_.keys()).parse()
    prec = GroupElem(prec)

    def ev(e):
        if isinstance(e, Num):
            return H.const(e.q)
        if isinstance(e, Var):
            return H.t(vars_[e.name])
        if isinstance(e, Neg):
            return -ev(e.a)
        if isinstance(e, Pow):
            b = ev(e.a)
            if e.k < 0:
                b = hs_div(H.one, b, prec)
            r = H.one
            for _ in range(abs(e.k)):
                r = r * b
            return r
        if isinstance(e, BinOp):
            x, y = ev(e.a), ev(e.b)
            if e.op == "+":
                return x + y
            if e.op == "-":
                return x - y
            if e.op == "*":
                return x * y
            return hs_div(x, y, prec)
        raise ParseError(f"cannot evaluate {e!r}")

    return ev(ast)
