"""Stringent valued hyperfields as sequence structures, as hyperfields with
a four-case hypersum, and as RV-sorts with a single-valued oplus.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .errors import FNotField, GuardViolation, NotStringent, ValHyperError, ZeroDivision
from .hyperfield import (
    EMPTY,
    Hyperfield,
    HyperElem,
    Report,
    Scope,
    Singleton,
    SumSet,
    ZeroBall,
    Exhaustive,
    Sampled,
    _Acc,
    members,
)
from .ogroup import INF, Cut, GroupElem, Segment, lift_from_quotient, quotient_map, zero as gzero


@dataclass(frozen=True)
class RVElem:
    """Zero (f is None) or a nonzero pair (f, g) of the split realization."""

    f: object
    g: object

    def is_zero(self) -> bool:
        return self.f is None

    def __repr__(self):
        if self.f is None:
            return "0"
        return f"({self.f}; {self.g!r})"


class RVSort:
    """Common interface: zero, one, mul, inv, neg, oplus, val, sampling."""

    n: int = 0
    finite = False
    hid = "rv"

    def is_zero(self, a) -> bool:
        return a == self.zero

    def elements(self):
        return None

    def fmt(self, a) -> str:
        return repr(a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def in_F(self, r) -> bool:
        """r lies in F^x: 1 + r and 1 + 1/r both differ from 1."""
        if self.is_zero(r):
            return False
        one = self.one
        return self.oplus(one, r) != one and self.oplus(one, self.inv(r)) != one

    def lt(self, a, b) -> bool:
        """[a] < [b] in the recovered value group: 1 + b/a = 1."""
        return self.oplus(self.one, self.div(b, a)) == self.one


# ------------------------------------------------------ sequence structures


class SequenceStructure(RVSort):
    """Split sequence structure F^x -> F^x x Z^n -> Z^n with boxplus and oplus."""

    def __init__(self, F, n: int, name: str | None = None):
        self.F = F
        self.n = n
        self.hid = name or f"RV({F.name},Z^{n})"
        self.zero = RVElem(None, INF)
        self.one = RVElem(F.one, gzero(n))
        self.span = 2
        self.finite = n == 0 and F.elements() is not None

    def __repr__(self):
        return self.hid

    def make(self, f, g) -> RVElem:
        if self.F.is_zero(f):
            return self.zero
        return RVElem(self.F.canon(f), GroupElem(g))

    def iota(self, f) -> RVElem:
        return self.make(f, gzero(self.n))

    def nu(self, a):
        return a.g

    val = nu

    def monomial(self, g) -> RVElem:
        return RVElem(self.F.one, GroupElem(g))

    def fmt(self, a) -> str:
        if a.f is None:
            return "0"
        return f"({self.F.fmt(a.f)}; {a.g!r})"

    def elements(self):
        if not self.finite:
            return None
        return [self.zero] + [self.iota(f) for f in self.F.elements() if not self.F.is_zero(f)]

    def mul(self, a, b):
        if a.f is None or b.f is None:
            return self.zero
        return RVElem(self.F.mul(a.f, b.f), a.g + b.g)

    def inv(self, a):
        if a.f is None:
            raise ZeroDivision("inverse of 0")
        return RVElem(self.F.inv(a.f), -a.g)

    def neg(self, a):
        if a.f is None:
            return a
        return RVElem(self.F.neg(a.f), a.g)

    def boxplus(self, a, b) -> SumSet:
        if a.f is None:
            return Singleton(b)
        if b.f is None:
            return Singleton(a)
        if b == self.neg(a):
            # iota(1-1)*a = {0} plus everything of larger value
            return ZeroBall(Cut(a.g, 0, self.n))
        if b.g > a.g:
            return Singleton(a)
        if a.g > b.g:
            return Singleton(b)
        return Singleton(RVElem(self.F.add(a.f, b.f), a.g))

    def oplus(self, a, b):
        if a.f is None:
            return b
        if b.f is None:
            return a
        if b.g > a.g:
            return a
        if a.g > b.g:
            return b
        s = self.F.add(a.f, b.f)
        if self.F.is_zero(s):
            return self.zero
        return RVElem(s, a.g)

    # sampling
    def _rand_g(self, rng):
        return GroupElem(rng.randint(-self.span, self.span) for _ in range(self.n))

    def sample(self, rng: random.Random, nonzero: bool = False):
        if not nonzero and rng.random() < 0.05:
            return self.zero
        return self.sample_at(self._rand_g(rng), rng)

    def sample_at(self, g, rng: random.Random):
        return RVElem(self.F.canon(self.F.random(rng, nonzero=True)), GroupElem(g))

    def sample_F(self, rng: random.Random):
        return self.sample_at(gzero(self.n), rng)


def sequence_structure(spec: str) -> SequenceStructure:
    """'q,z' or 'f3,z2': F^x -> F^x x Z^n -> Z^n over a base field."""
    from .groundfield import base_field

    try:
        f, g = [p.strip().lower() for p in spec.split(",")]
        if not g.startswith("z"):
            raise ValueError
        n = int(g[1:] or 1)
        return SequenceStructure(base_field(f), n, f"RV({f},Z^{n})")
    except ValueError:
        raise ValueError(f"not a sort spec {spec!r}; expected e.g. 'q,z' or 'f3,z2'") from None


class SplitSequence(SequenceStructure):
    """Sequence structure recovered from a stringent valued handle H.

    F is the kernel of the valuation inside H; ``split`` and ``unsplit``
    translate between H and pairs (f, g) through a multiplicative section.
    """

    def __init__(self, H: Hyperfield, F, section, n: int, name: str | None = None, wval=None):
        super().__init__(F, n, name or f"RV[{H.hid}]")
        self.H = H
        self.section = section
        self.wval = wval or H.val

    def split(self, x) -> RVElem:
        H = self.H
        if H.is_zero(x):
            return self.zero
        g = self.wval(x)
        f = H.mul(x, H.inv(self.section(g)))
        return RVElem(f, GroupElem(g))

    def unsplit(self, a):
        if a.f is None:
            return self.H.zero
        return self.H.mul(a.f, self.section(a.g))


class KernelField:
    """The field ker(v) + {0} inside a stringent valued handle."""

    def __init__(self, H: Hyperfield, section=None, wval=None):
        self.H = H
        self.name = f"ker({H.hid})"
        self.zero = H.zero
        self.one = H.one
        self.char = None
        self.section = section
        self.wval = wval or H.val

    def __repr__(self):
        return self.name

    def add(self, a, b):
        S = self.H.add(a, b)
        if S.kind == "singleton":
            return S.witness
        if S.kind == "zeroball":
            return self.H.zero
        raise NotStringent(f"{self.H.fmt(a)} + {self.H.fmt(b)} is not a single element", (a, b))

    def sub(self, a, b):
        return self.add(a, self.H.neg(b))

    def mul(self, a, b):
        return self.H.mul(a, b)

    def neg(self, a):
        return self.H.neg(a)

    def inv(self, a):
        return self.H.inv(a)

    def is_zero(self, a) -> bool:
        return self.H.is_zero(a)

    def eq(self, a, b) -> bool:
        return a == b

    def canon(self, a):
        return a

    def coerce(self, q):
        from fractions import Fraction

        q = Fraction(q)
        H = self.H
        num = self._int(q.numerator)
        den = self._int(q.denominator)
        return H.mul(num, H.inv(den))

    def _int(self, k: int):
        acc = self.zero
        unit = self.one if k >= 0 else self.H.neg(self.one)
        for _ in range(abs(k)):
            acc = self.add(acc, unit)
        return acc

    def elements(self):
        if not self.H.finite:
            return None
        return [x for x in self.H.elements() if self.H.is_zero(x) or self.H.val(x) == gzero(self.H.n)]

    def random(self, rng: random.Random, bound: int = 2, nonzero: bool = False):
        H = self.H
        while True:
            x = H.sample(rng, nonzero=True)
            if self.section is None:
                if H.val(x) == gzero(H.n):
                    return x
                continue
            return H.mul(x, H.inv(self.section(self.wval(x))))

    def fmt(self, a) -> str:
        return self.H.fmt(a)


# ------------------------------------------------- hyperfield presentation


class RVHyperfield(Hyperfield):
    """A sequence structure viewed as a stringent valued hyperfield of norm {0}."""

    def __init__(self, S: SequenceStructure):
        self.S = S
        self.hid = f"Hyp[{S.hid}]"
        self.n = S.n
        self.norm = Segment.zero(S.n)
        self.zero = self.elem(None)
        self.one = self.wrap(S.one)
        self.finite = S.finite

    def wrap(self, a: RVElem) -> HyperElem:
        return self.elem(None if a.f is None else (a.f, a.g))

    def unwrap(self, x) -> RVElem:
        return self.S.zero if x.payload is None else RVElem(*x.payload)

    def fmt(self, x) -> str:
        return self.S.fmt(self.unwrap(x))

    def elements(self):
        els = self.S.elements()
        if els is None:
            return super().elements()
        return [self.wrap(a) for a in els]

    def val(self, x):
        return INF if x.payload is None else x.payload[1]

    def monomial(self, g):
        return self.wrap(self.S.monomial(g))

    def mul(self, x, y):
        self.own(x, y)
        return self.wrap(self.S.mul(self.unwrap(x), self.unwrap(y)))

    def inv(self, x):
        self.own(x)
        return self.wrap(self.S.inv(self.unwrap(x)))

    def neg(self, x):
        self.own(x)
        return self.wrap(self.S.neg(self.unwrap(x)))

    def add(self, x, y) -> SumSet:
        self.own(x, y)
        B = self.S.boxplus(self.unwrap(x), self.unwrap(y))
        if B.kind == "singleton":
            return Singleton(self.wrap(B.witness))
        return B

    def d(self, x, y):
        if x == y:
            return INF
        a, b = self.unwrap(x), self.unwrap(y)
        if a.f is None or b.f is None or a.g != b.g:
            return min(a.g, b.g)
        s = self.S.F.sub(a.f, b.f)
        return INF if self.S.F.is_zero(s) else a.g

    def sample(self, rng, nonzero=False):
        return self.wrap(self.S.sample(rng, nonzero))

    def sample_member(self, S: SumSet, rng):
        if S.kind == "zeroball":
            if rng.random() < 0.2:
                return self.zero
            g = S.cut.c + GroupElem((0,) * (self.n - 1) + (rng.randint(1, 2),)) if self.n else S.cut.c
            return self.wrap(self.S.sample_at(g, rng))
        return super().sample_member(S, rng)

    def sample_pair(self, rng):
        x = self.sample(rng)
        r = rng.random()
        if x.payload is None or r < 0.4:
            return x, self.sample(rng)
        if r < 0.6:
            return x, self.neg(x)
        return x, self.wrap(self.S.sample_at(x.payload[1], rng))


def boxplus(S: SequenceStructure, a: RVElem, b: RVElem) -> SumSet:
    return S.boxplus(a, b)


def oplus(S: RVSort, a, b):
    return S.oplus(a, b)


def to_stringent(S: SequenceStructure) -> RVHyperfield:
    return RVHyperfield(S)


# -------------------------------------------- RV-sort from a handle


class HandleRV(RVSort):
    """oplus obtained by collapsing the hypersum of a handle.

    Singleton sums give their element and sums containing 0 give 0.  For
    finite tables without a valuation a multi-element sum containing a
    collapses to a (this is how the Krasner and sign hyperfields are read).
    """

    def __init__(self, H: Hyperfield, section=None):
        self.H = H
        self.hid = f"RV<{H.hid}>"
        self.zero = H.zero
        self.one = H.one
        self.n = H.n or 0
        self.finite = H.finite
        self.section = section or getattr(H, "monomial", None)

    def fmt(self, a) -> str:
        return self.H.fmt(a)

    def elements(self):
        return self.H.elements() if self.H.finite else None

    def mul(self, a, b):
        return self.H.mul(a, b)

    def inv(self, a):
        return self.H.inv(a)

    def neg(self, a):
        return self.H.neg(a)

    def val(self, a):
        return self.H.val(a)

    def monomial(self, g):
        return self.section(g)

    def oplus(self, a, b):
        S = self.H.add(a, b)
        if S.kind == "singleton":
            return S.witness
        if S.kind == "zeroball":
            return self.H.zero
        if S.kind == "enum" and not self.H.has_val:
            return a if a in S.items else self.H.zero
        if S.kind == "enum" and self.H.zero in S.items:
            return self.H.zero
        raise NotStringent(f"{self.H.fmt(a)} + {self.H.fmt(b)} = {self.H.fmt_set(S)}", (a, b))

    def sample(self, rng, nonzero=False):
        return self.H.sample(rng, nonzero)

    def sample_at(self, g, rng):
        u = KernelField(self.H, self.section).random(rng)
        return self.H.mul(u, self.section(g))

    def sample_F(self, rng):
        if self.finite:
            F = [r for r in self.H.elements() if self.in_F(r)]
            return rng.choice(F) if F else self.one
        return KernelField(self.H, self.section).random(rng)


# --------------------------------------------------- from a stringent handle


def _pairs(H: Hyperfield, scope: Scope):
    if H.finite:
        return itertools.product(H.elements(), repeat=2)
    rng = random.Random(scope.seed)
    pair = getattr(H, "sample_pair", None)
    return [pair(rng) if pair else (H.sample(rng), H.sample(rng)) for _ in range(scope.n)]


def stringency_witness(H: Hyperfield, scope: Scope = Sampled(200)):
    """A pair whose sum has several elements and avoids 0, or None."""
    for x, y in _pairs(H, scope):
        S = H.add(x, y)
        if S.kind == "ball":
            return (x, y, S)
        if S.kind == "enum" and H.zero not in S.items:
            return (x, y, S)
    return None


def from_stringent(H: Hyperfield, section=None, scope: Scope = Sampled(200), delta=None) -> SplitSequence:
    """Sequence structure of a stringent valued handle.

    With a convex subgroup ``delta`` the value map is v followed by the
    projection to Gamma/delta, and F^x is the set of elements whose value
    lies in delta.
    """
    w = stringency_witness(H, scope)
    if w is not None:
        x, y, S = w
        raise NotStringent(f"{H.fmt(x)} + {H.fmt(y)} = {H.fmt_set(S)} has several nonzero members", (x, y))
    if H.member(H.sub(H.one, H.one), H.one):
        raise FNotField(f"1 lies in 1 - 1 in {H.hid}: the recovered F is K or S, so there is no valuation")
    if not H.has_val:
        raise ValHyperError(f"{H.hid} carries no valuation")
    section = section or getattr(H, "monomial", None)
    if section is None:
        if H.n:
            raise ValHyperError("a section of the valuation is needed")
        section = lambda g: H.one  # noqa: E731
    if delta is None:
        F = KernelField(H, section)
        return SplitSequence(H, F, section, H.n)
    full = section
    wval = lambda x: quotient_map(H.val(x), delta)  # noqa: E731
    qsection = lambda g: full(lift_from_quotient(g, delta))  # noqa: E731
    F = KernelField(H, qsection, wval)
    return SplitSequence(H, F, qsection, delta.quotient_rank, f"RV[{H.hid}/{delta}]", wval)


# ------------------------------------------------------ recovered Gamma


class RecoveredGamma:
    """Gamma = H^x / ~ with a ~ b iff a+b is neither {a} nor {b} (reflexive by convention)."""

    def __init__(self, H: Hyperfield):
        self.H = H

    def same(self, a, b) -> bool:
        if a == b:
            return True
        S = self.H.add(a, b)
        return not (S.kind == "singleton" and S.witness in (a, b))

    def lt(self, a, b) -> bool:
        """[a] < [b]: a absorbs b."""
        S = self.H.add(a, b)
        return S.kind == "singleton" and S.witness == a and not self.same(a, b)

    def classes(self):
        if not self.H.finite:
            raise ValHyperError("classes are listed only for finite carriers")
        out = []
        for x in self.H.elements():
            if self.H.is_zero(x):
                continue
            for c in out:
                if self.same(c[0], x):
                    c.append(x)
                    break
            else:
                out.append([x])
        return out


def recover_gamma(H: Hyperfield, scope: Scope = Sampled(200)) -> RecoveredGamma:
    w = stringency_witness(H, scope)
    if w is not None:
        x, y, S = w
        raise NotStringent(f"{H.fmt(x)} + {H.fmt(y)} = {H.fmt_set(S)}", (x, y))
    return RecoveredGamma(H)


# -------------------------------------------------------------- n-ary oplus


def oplus_n(R: RVSort, xs, guard: bool = True):
    """Left fold of oplus, refused unless every bracketing gives the same answer."""
    xs = [x for x in xs if not R.is_zero(x)]
    if not xs:
        return R.zero
    if guard and len(xs) > 2:
        vals = [R.val(x) for x in xs]
        if len(set(vals)) not in (1, len(vals)):
            raise GuardViolation("summands are neither of one value nor of pairwise distinct values")
    acc = xs[0]
    for x in xs[1:]:
        acc = R.oplus(acc, x)
    return acc


def all_bracketings(R: RVSort, xs):
    """Every value of a full bracketing of xs in the given order."""
    xs = list(xs)
    if len(xs) == 1:
        return {xs[0]}
    out = set()
    for i in range(1, len(xs)):
        for a in all_bracketings(R, xs[:i]):
            for b in all_bracketings(R, xs[i:]):
                out.add(R.oplus(a, b))
    return out


# ----------------------------------------------------------------- checkers


def _rv_tuples(R: RVSort, scope: Scope, k: int):
    els = R.elements()
    if scope.kind == "exhaustive" and els is not None:
        yield from itertools.product(els, repeat=k)
        return
    if els is not None:
        rng = random.Random(scope.seed)
        for _ in range(scope.n):
            yield tuple(rng.choice(els) for _ in range(k))
        return
    rng = random.Random(scope.seed)
    for _ in range(scope.n):
        a = R.sample(rng)
        t = [a]
        for _ in range(k - 1):
            r = rng.random()
            if r < 0.3 or R.is_zero(a):
                t.append(R.sample(rng))
            elif r < 0.6:
                t.append(R.mul(a, R.sample_F(rng)))
            elif r < 0.75:
                t.append(R.neg(t[-1]))
            else:
                t.append(R.mul(t[-1], R.sample_F(rng)))
        yield tuple(t)


def _F_elements(R: RVSort, scope: Scope, rng):
    els = R.elements()
    if els is not None:
        return [r for r in els if R.in_F(r)]
    return [R.sample_F(rng) for _ in range(max(8, min(scope.n, 40)))]


def check_rv_axioms(R: RVSort, scope: Scope = Sampled(1000)) -> list[Report]:
    names = ["RV1", "RV2", "RV3", "RV4", "RV5", "RV6", "RV7"]
    acc = _Acc(names, scope.seed)
    f = R.fmt
    one, zero = R.one, R.zero
    rng = random.Random(scope.seed + 7)
    for a, b, c in _rv_tuples(R, scope, 3):
        # RV1 on nonzero elements
        if not (R.is_zero(a) or R.is_zero(b) or R.is_zero(c)):
            acc.check("RV1", R.mul(a, b) == R.mul(b, a), lambda: {"comm": (f(a), f(b))})
            acc.check("RV1", R.mul(R.mul(a, b), c) == R.mul(a, R.mul(b, c)), lambda: {"assoc": (f(a), f(b), f(c))})
            acc.check("RV1", R.mul(a, one) == a, lambda: {"unit": f(a)})
            try:
                ok = R.mul(a, R.inv(a)) == one and not R.is_zero(R.mul(a, b))
            except ValHyperError:
                ok = False
            acc.check("RV1", ok, lambda: {"inverse": f(a)})
        acc.check("RV2", R.oplus(zero, a) == a, lambda: {"a": f(a)})
        ab, bc = R.oplus(a, b), R.oplus(b, c)
        left, right = R.oplus(ab, c), R.oplus(a, bc)
        acc.check(
            "RV3",
            left == right or R.is_zero(ab) or R.is_zero(bc),
            lambda: {"abc": (f(a), f(b), f(c)), "(a+b)+c": f(left), "a+(b+c)": f(right)},
        )
        acc.check("RV4", ab == R.oplus(b, a), lambda: {"ab": (f(a), f(b))})
        acc.check("RV5", R.mul(ab, c) == R.oplus(R.mul(a, c), R.mul(b, c)), lambda: {"abc": (f(a), f(b), f(c))})
    # RV6: F is a field
    Fx = _F_elements(R, scope, rng)
    if not R.in_F(one):
        acc.check("RV6", False, {"1 not in F^x": f"1+1 = {f(R.oplus(one, one))}", "F^x": [f(r) for r in Fx]})
    else:
        F0 = Fx + [zero]
        trip = itertools.product(F0, repeat=3) if R.elements() is not None else (
            tuple(rng.choice(F0) for _ in range(3)) for _ in range(min(scope.n, 500))
        )
        inF = lambda r: R.is_zero(r) or R.in_F(r)  # noqa: E731
        for a, b, c in trip:
            s = R.oplus(a, b)
            acc.check("RV6", inF(s) and inF(R.mul(a, b)), lambda: {"closure": (f(a), f(b))})
            acc.check("RV6", R.oplus(R.oplus(a, b), c) == R.oplus(a, R.oplus(b, c)), lambda: {"assoc": (f(a), f(b), f(c))})
            acc.check("RV6", R.is_zero(R.oplus(a, R.neg(a))) and inF(R.neg(a)), lambda: {"negative": f(a)})
            if not R.is_zero(a):
                acc.check("RV6", inF(R.inv(a)), lambda: {"inverse": f(a)})
            acc.check("RV6", R.mul(R.oplus(a, b), c) == R.oplus(R.mul(a, c), R.mul(b, c)), lambda: {"distrib": (f(a), f(b), f(c))})
    # RV7
    for (a,) in _rv_tuples(R, scope, 1):
        for r in (rng.choice(Fx),) if Fx else ():
            acc.check(
                "RV7",
                (R.oplus(a, one) == one) == (R.oplus(a, r) == r),
                lambda: {"a": f(a), "r": f(r)},
            )
    return acc.out()


def derive_rv8_9_10(R: RVSort, scope: Scope = Sampled(1000)) -> list[Report]:
    acc = _Acc(["RV8", "RV9", "RV10"], scope.seed)
    f = R.fmt
    rng = random.Random(scope.seed + 11)
    one, zero = R.one, R.zero
    m1 = R.neg(one)
    Fx = _F_elements(R, scope, rng)
    has_val = not isinstance(R, HandleRV) or R.H.has_val
    for a, b, c in _rv_tuples(R, scope, 3):
        acc.check("RV8", R.is_zero(R.mul(zero, a)), lambda: {"a": f(a)})
        na = R.mul(m1, a)
        acc.check("RV9", R.is_zero(R.oplus(a, na)), lambda: {"a": f(a)})
        if b != na:
            acc.check("RV9", not R.is_zero(R.oplus(a, b)), lambda: {"a": f(a), "b": f(b)})
        if R.is_zero(a) or R.is_zero(b) or R.is_zero(c):
            continue
        lab, lba = R.lt(a, b), R.lt(b, a)
        same = R.in_F(R.div(b, a))
        acc.check("RV10", [same, lab, lba].count(True) == 1, lambda: {"trichotomy": (f(a), f(b))})
        if Fx:
            r, r2 = rng.choice(Fx), rng.choice(Fx)
            acc.check(
                "RV10",
                R.lt(R.mul(a, r), R.mul(b, r2)) == lab,
                lambda: {"well-defined": (f(a), f(b)), "reps": (f(r), f(r2))},
            )
        if lab and R.lt(b, c):
            acc.check("RV10", R.lt(a, c), lambda: {"transitive": (f(a), f(b), f(c))})
        acc.check("RV10", R.lt(R.mul(a, c), R.mul(b, c)) == lab, lambda: {"translation": (f(a), f(b), f(c))})
        if has_val and R.n:
            acc.check("RV10", lab == (R.val(a) < R.val(b)), lambda: {"order vs value": (f(a), f(b))})
    return acc.out()
