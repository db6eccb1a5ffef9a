"""Hyperfields with set-valued addition, finite table instances, factor
hyperfields, valued quotients H_rho(K) of series fields, and axiom checkers.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from .errors import (
    ElementsFromDifferentHandles,
    InsufficientPrecision,
    NotEnumerable,
    TNotSubgroup,
    ValHyperError,
    ZeroDivision,
)
from .groundfield import Series, SeriesField, _multiple_reaching, series_poly_str
from .ogroup import (
    INF,
    Cut,
    GroupElem,
    Segment,
    gt_segment,
    min_cut,
    seg_contains,
    seg_leq,
    zero as gzero,
)


class HyperElem(NamedTuple):
    hid: str
    payload: object

    def __repr__(self):
        return f"<{self.hid}:{self.payload!r}>"


# ------------------------------------------------------------------ sum sets


@dataclass(frozen=True)
class SumSet:
    """Result of a hyperoperation.

    kind is one of empty, singleton, ball, zeroball, enum.  A ball holds a
    witness and a cut: its members are the witness and every z with
    d(z, witness) above the cut.  A zeroball holds every w whose value is
    above the cut (0 included).
    """

    kind: str
    witness: HyperElem | None = None
    cut: Cut | None = None
    items: frozenset = frozenset()

    def __repr__(self):
        if self.kind == "empty":
            return "Empty"
        if self.kind == "singleton":
            return f"Singleton({self.witness!r})"
        if self.kind == "ball":
            return f"Ball({self.witness!r}, floor={self.cut})"
        if self.kind == "zeroball":
            return f"ZeroBall(floor={self.cut})"
        return f"Enumerated({sorted(self.items, key=_sort_key)!r})"


def _sort_key(x: HyperElem):
    p = x.payload
    return (0, p) if isinstance(p, (int, float)) else (1, repr(p))


EMPTY = SumSet("empty")


def Singleton(z: HyperElem) -> SumSet:
    return SumSet("singleton", witness=z)


def Ball(w: HyperElem, cut: Cut) -> SumSet:
    return SumSet("ball", witness=w, cut=cut)


def ZeroBall(cut: Cut) -> SumSet:
    return SumSet("zeroball", cut=cut)


def Enumerated(items) -> SumSet:
    items = frozenset(items)
    if not items:
        return EMPTY
    if len(items) == 1:
        return Singleton(next(iter(items)))
    return SumSet("enum", items=items)


def members(S: SumSet) -> frozenset:
    if S.kind == "empty":
        return frozenset()
    if S.kind == "singleton":
        return frozenset([S.witness])
    if S.kind == "enum":
        return S.items
    raise NotEnumerable("ball-valued sum cannot be listed")


@dataclass(frozen=True)
class SetVal:
    """Values attained on a SumSet: a single value, or all values above a cut (and inf)."""

    kind: str  # single | upset | many | none
    value: object = None
    cut: Cut | None = None
    values: frozenset = frozenset()


def cut_shift(cut: Cut, g) -> Cut:
    if cut.c is INF or g is INF:
        return Cut(INF, 0, cut.n)
    c = cut.c + g
    if cut.k:
        m = cut.n - cut.k
        c = GroupElem(tuple(c[:m]) + (0,) * cut.k)
    return Cut(c, cut.k, cut.n)


# ------------------------------------------------------------------- handles


class Hyperfield:
    hid = "?"
    finite = False
    norm: Segment | None = None
    n: int | None = None

    @property
    def has_val(self) -> bool:
        return self.norm is not None

    def elem(self, payload) -> HyperElem:
        return HyperElem(self.hid, payload)

    def own(self, *xs):
        for x in xs:
            if not isinstance(x, HyperElem) or x.hid != self.hid:
                raise ElementsFromDifferentHandles(f"{x!r} is not an element of {self.hid}")

    def is_zero(self, x) -> bool:
        return x == self.zero

    def sub(self, x, y) -> SumSet:
        return self.add(x, self.neg(y))

    def elements(self):
        raise NotEnumerable(f"{self.hid} has an infinite carrier")

    def fmt(self, x) -> str:
        return str(x.payload)

    def fmt_set(self, S: SumSet) -> str:
        if S.kind in ("empty", "singleton", "enum"):
            return "{" + ",".join(self.fmt(z) for z in sorted(members(S), key=_sort_key)) + "}"
        if S.kind == "ball":
            return f"Ball({self.fmt(S.witness)}, floor={S.cut})"
        return f"ZeroBall(floor={S.cut})"

    def val(self, x):
        raise ValHyperError(f"{self.hid} carries no valuation")

    def member(self, S: SumSet, z) -> bool:
        if S.kind == "empty":
            return False
        if S.kind == "singleton":
            return z == S.witness
        if S.kind == "enum":
            return z in S.items
        if S.kind == "zeroball":
            return S.cut.exceeded_by(self.val(z))
        return z == S.witness or S.cut.exceeded_by(self.d(z, S.witness))

    def make_ball(self, w, cut: Cut) -> SumSet:
        """The ball of elements farther than ``cut`` from w, in normal form."""
        if self.is_zero(w) or cut.exceeded_by(self.val(w)):
            return ZeroBall(cut)
        if Cut.of(self.norm, self.val(w)) == cut:
            return Singleton(w)
        return Ball(w, cut)

    def d(self, x, y):
        """Ultrametric distance: the common value of x - y."""
        if x == y:
            return INF
        sv = set_val(self, self.sub(x, y))
        if sv.kind != "single":
            raise ValHyperError(f"x - y has no single value in {self.hid}")
        return sv.value

    def sample(self, rng: random.Random, nonzero: bool = False):
        els = [e for e in self.elements() if not (nonzero and self.is_zero(e))]
        return rng.choice(els)

    def sample_member(self, S: SumSet, rng: random.Random):
        return rng.choice(sorted(members(S), key=_sort_key))

    def probe(self, S: SumSet, rng: random.Random):
        """An element that is often but not always inside S."""
        if rng.random() < 0.5 and S.kind != "empty":
            return self.sample_member(S, rng)
        return self.sample(rng)


class TableHyperfield(Hyperfield):
    """Finite hyperfield given by addition and multiplication tables on payloads."""

    finite = True

    def __init__(self, hid, carrier, add_table, mul_table, zero=0, one=1, labels=None, val=None, norm=None):
        self.hid = hid
        self.carrier = list(carrier)
        self.add_table = {k: frozenset(v) for k, v in add_table.items()}
        self.mul_table = dict(mul_table)
        self.zero = self.elem(zero)
        self.one = self.elem(one)
        self.labels = labels or {}
        self.val_table = val
        self.norm = norm
        self.n = None if norm is None else norm.n
        self._neg = {}
        self._inv = {}

    def elements(self):
        return [self.elem(p) for p in self.carrier]

    def fmt(self, x) -> str:
        return self.labels.get(x.payload, str(x.payload))

    def add(self, x, y) -> SumSet:
        self.own(x, y)
        return Enumerated(self.elem(p) for p in self.add_table[(x.payload, y.payload)])

    def mul(self, x, y):
        self.own(x, y)
        return self.elem(self.mul_table[(x.payload, y.payload)])

    def neg(self, x):
        if x.payload not in self._neg:
            cands = [p for p in self.carrier if self.zero.payload in self.add_table[(x.payload, p)]]
            self._neg[x.payload] = cands[0] if cands else None
        p = self._neg[x.payload]
        if p is None:
            raise ValHyperError(f"{self.fmt(x)} has no additive inverse")
        return self.elem(p)

    def inv(self, x):
        if self.is_zero(x):
            raise ZeroDivision("inverse of 0")
        if x.payload not in self._inv:
            cands = [p for p in self.carrier if self.mul_table[(x.payload, p)] == self.one.payload]
            self._inv[x.payload] = cands[0] if cands else None
        p = self._inv[x.payload]
        if p is None:
            raise ValHyperError(f"{self.fmt(x)} has no inverse")
        return self.elem(p)

    def val(self, x):
        if self.val_table is None:
            return super().val(x)
        return self.val_table[x.payload]

    def with_valuation(self, val: dict, norm: Segment, hid: str | None = None) -> "TableHyperfield":
        return TableHyperfield(
            hid or self.hid + "+v",
            self.carrier,
            self.add_table,
            self.mul_table,
            self.zero.payload,
            self.one.payload,
            self.labels,
            val,
            norm,
        )

    def with_trivial_valuation(self) -> "TableHyperfield":
        e = GroupElem(())
        val = {p: (INF if p == self.zero.payload else e) for p in self.carrier}
        return self.with_valuation(val, Segment.zero(0), self.hid + "+triv")


def krasner_K() -> TableHyperfield:
    add = {(0, 0): {0}, (0, 1): {1}, (1, 0): {1}, (1, 1): {0, 1}}
    mul = {(a, b): a * b for a in (0, 1) for b in (0, 1)}
    return TableHyperfield("K", [0, 1], add, mul)


def krasner_S() -> TableHyperfield:
    els = [-1, 0, 1]
    add = {}
    for a in els:
        for b in els:
            if a == 0 or b == 0:
                add[(a, b)] = {a + b}
            elif a == b:
                add[(a, b)] = {a}
            else:
                add[(a, b)] = {-1, 0, 1}
    mul = {(a, b): a * b for a in els for b in els}
    return TableHyperfield("S", els, add, mul)


def field_as_hyperfield(F) -> TableHyperfield:
    els = F.elements()
    if els is None:
        raise NotEnumerable(f"{F!r} is infinite")
    add = {(a, b): {F.add(a, b)} for a in els for b in els}
    mul = {(a, b): F.mul(a, b) for a in els for b in els}
    return TableHyperfield(F.name, els, add, mul)


def factor_hyperfield(H: Hyperfield, T) -> TableHyperfield:
    """H_T for a finite hyperfield H and a subgroup T of H^x (payloads or elements)."""
    if not H.finite:
        raise NotEnumerable("factor by an explicit finite T needs a finite carrier; use quotient_of for H_rho(K)")
    T = frozenset(t if isinstance(t, HyperElem) else H.elem(t) for t in T)
    if H.one not in T:
        raise TNotSubgroup("1 is not in T")
    for a in T:
        if H.is_zero(a):
            raise TNotSubgroup("0 is in T")
        for b in T:
            if H.mul(a, b) not in T:
                raise TNotSubgroup(f"{H.fmt(a)}*{H.fmt(b)} = {H.fmt(H.mul(a, b))} is not in T")
        if H.inv(a) not in T:
            raise TNotSubgroup(f"inverse of {H.fmt(a)} is not in T")
    key = lambda e: _sort_key(e)  # noqa: E731
    cls = {}
    for x in H.elements():
        coset = sorted({H.mul(x, t) for t in T}, key=key)
        cls[x] = coset[0]
    reps = sorted(set(cls.values()), key=key)
    carrier = [r.payload for r in reps]
    add, mul = {}, {}
    for a in reps:
        for b in reps:
            out = set()
            for t in T:
                for z in members(H.add(a, H.mul(b, t))):
                    out.add(cls[z].payload)
            add[(a.payload, b.payload)] = out
            mul[(a.payload, b.payload)] = cls[H.mul(a, b)].payload
    tl = ",".join(H.fmt(t) for t in sorted(T, key=key))
    labels = {r.payload: f"[{H.fmt(r)}]" for r in reps}
    return TableHyperfield(f"{H.hid}/{{{tl}}}", carrier, add, mul, cls[H.zero].payload, cls[H.one].payload, labels)


# -------------------------------------------------------- valued quotients


def _prec_above(cut: Cut):
    """Least precision cut that covers every exponent at or below ``cut``."""
    if cut.k == 0:
        c = cut.c
        return GroupElem(tuple(c[:-1]) + (c[-1] + 1,))
    m = cut.n - cut.k
    if m == 0:
        return None
    c = cut.c
    return GroupElem(tuple(c[: m - 1]) + (c[m - 1] + 1,) + (0,) * cut.k)


class QuotientHandle(Hyperfield):
    """H_rho(K) = K / (1 + m_rho) for a series field K.

    Payload of a nonzero class is (value, window) where the window lists the
    (relative exponent, coefficient) pairs of a representative that are not
    above rho + value; these determine the class.
    """

    def __init__(self, K: SeriesField, rho: Segment, span: int = 2):
        if rho.n != K.n:
            raise ValueError("segment rank differs from the value group rank")
        self.K = K
        self.rho = rho
        self.norm = rho
        self.n = K.n
        self.span = span
        self.hid = f"H{rho}({K.name})"
        self.zero = self.elem(None)
        self._reps = {}
        self._sums = {}
        self._cuts = {}
        self.one = self.theta(K.one())
        self._window_exps = None
        self._coeffs = [K.base.coerce(c) for c in (-2, -1, 0, 1, 2)]
        self._nz_coeffs = [c for c in self._coeffs if not K.base.is_zero(c)]

    def __repr__(self):
        return f"QuotientHandle({self.K.name}, {self.rho})"

    # -- conversions
    def cut_at(self, g) -> Cut:
        c = self._cuts.get(g)
        if c is None:
            if len(self._cuts) > 100000:
                self._cuts.clear()
            c = self._cuts[g] = Cut.of(self.rho, g)
        return c

    def theta(self, a: Series) -> HyperElem:
        if a.is_exact_zero():
            return self.zero
        g0 = a.val()
        cut = self.cut_at(g0)
        if a.prec is not None and not cut.exceeded_by(a.prec):
            raise InsufficientPrecision(f"need precision beyond {self.rho} + {g0!r}, have {a.prec!r}")
        win = []
        for e, c in a.terms:
            if cut.exceeded_by(e):
                break
            win.append((e - g0, c))
        return self.elem((g0, tuple(win)))

    def rep(self, x) -> Series:
        p = x.payload
        if p is None:
            return self.K.zero()
        r = self._reps.get(p)
        if r is None:
            g0, win = p
            r = Series(self.K, tuple((e + g0, c) for e, c in win), None)
            if len(self._reps) > 50000:
                self._reps.clear()
            self._reps[p] = r
        return r

    def monomial(self, g, c=None) -> HyperElem:
        return self.theta(self.K.monomial(g, c))

    def from_rf(self, text: str) -> HyperElem:
        from .groundfield import expand, parse_rf, to_fraction

        e = parse_rf(text, self.K.vars)
        n, d = to_fraction(e, self.K)
        if n.is_exact_zero():
            return self.zero
        v = n.val() - d.val()
        cut = Cut.of(self.rho, v)
        prec = _prec_above(cut)
        if prec is None:
            if len(d.terms) != 1:
                raise InsufficientPrecision("this class has no finite description")
            prec = n.terms[-1][0] - d.val() + GroupElem((0,) * (self.n - 1) + (1,))
        return self.theta(expand(e, prec, self.K))

    # -- structure
    def val(self, x):
        return INF if x.payload is None else x.payload[0]

    def fmt(self, x) -> str:
        return "[" + series_poly_str(self.rep(x)) + "]"

    def to_json(self, x):
        if x.payload is None:
            return {"value": "inf", "window": []}
        g0, win = x.payload
        return {"value": list(g0), "window": [[list(e), self.K.base.fmt(c)] for e, c in win]}

    def mul(self, x, y):
        self.own(x, y)
        if x.payload is None or y.payload is None:
            return self.zero
        return self.theta(self.rep(x) * self.rep(y))

    def neg(self, x):
        self.own(x)
        if x.payload is None:
            return x
        F = self.K.base
        g0, win = x.payload
        return self.elem((g0, tuple((e, F.neg(c)) for e, c in win)))

    def inv(self, x):
        self.own(x)
        if x.payload is None:
            raise ZeroDivision("inverse of [0]")
        g0, win = x.payload
        F = self.K.base
        c0inv = F.inv(win[0][1])
        if len(win) == 1:
            return self.elem((-g0, ((win[0][0], c0inv),)))
        rel = Cut.of(self.rho, win[0][0])
        if rel.k:
            return self.inv_via_series(x)
        # x = c0 t^g0 (1 - eps); sum eps^k on the window
        eps = [(e, F.neg(F.mul(c, c0inv))) for e, c in win[1:]]
        k = _multiple_reaching(eps[0][0], _prec_above(rel))
        if k is None:
            raise InsufficientPrecision("inverse window is infinite at this norm")
        z = win[0][0]
        S = {z: F.one}
        for _ in range(k):
            new = {z: F.one}
            for e1, c1 in eps:
                for e2, c2 in S.items():
                    e = e1 + e2
                    if rel.exceeded_by(e):
                        continue
                    c = F.mul(c1, c2)
                    new[e] = F.add(new[e], c) if e in new else c
            S = new
        out = tuple(sorted((e, F.mul(c, c0inv)) for e, c in S.items() if not F.is_zero(c)))
        return self.elem((-g0, out))

    def inv_via_series(self, x):
        """Inverse through a full series inversion (reference route)."""
        g0, win = x.payload
        prec = _prec_above(Cut.of(self.rho, -g0))
        if prec is None:
            raise InsufficientPrecision("inverse has no finite window in this quotient")
        return self.theta(self.rep(x).inverse(prec))

    def _window(self, terms) -> HyperElem:
        """Class of an exact series given by sorted nonzero terms."""
        if not terms:
            return self.zero
        g0 = terms[0][0]
        cut = self.cut_at(g0)
        win = []
        for e, c in terms:
            if cut.exceeded_by(e):
                break
            win.append((e - g0, c))
        return self.elem((g0, tuple(win)))

    def add(self, x, y) -> SumSet:
        self.own(x, y)
        if x.payload is None:
            return Singleton(y)
        if y.payload is None:
            return Singleton(x)
        key = (x.payload, y.payload)
        S = self._sums.get(key)
        if S is None:
            if len(self._sums) > 100000:
                self._sums.clear()
            S = self._sums[key] = self._add(x, y)
        return S

    def _add(self, x, y) -> SumSet:
        m = min(x.payload[0], y.payload[0])
        cut = self.cut_at(m)
        F = self.K.base
        d = dict(self.rep(x).terms)
        for e, c in self.rep(y).terms:
            d[e] = F.add(d[e], c) if e in d else c
        terms = sorted((e, c) for e, c in d.items() if not F.is_zero(c) and not cut.exceeded_by(e))
        if not terms:
            return ZeroBall(cut)
        w = self._window(terms)
        if self.cut_at(terms[0][0]) == cut:
            return Singleton(w)
        return Ball(w, cut)

    def d(self, x, y):
        if x == y:
            return INF
        return (self.rep(x) - self.rep(y)).val()

    # -- sampling
    def window_exps(self):
        if self._window_exps is None:
            B = self.span
            if self.rho.kind == "upto":
                B = max(B, max(abs(c) for c in self.rho.g))
            box = itertools.product(range(-B, B + 1), repeat=self.n)
            self._window_exps = [GroupElem(e) for e in box if any(e) and seg_contains(self.rho, GroupElem(e))]
        return self._window_exps

    def _coeff(self, rng, nonzero=False):
        pool = self._nz_coeffs if nonzero else self._coeffs
        return pool[int(rng.random() * len(pool))]

    def random_series(self, rng: random.Random, g0=None, extra: int = 3) -> Series:
        """Exact series with value g0 (random if None) and a few window terms plus a tail."""
        n = self.n
        w = 2 * self.span + 1
        if g0 is None:
            g0 = GroupElem(int(rng.random() * w) - self.span for _ in range(n))
        d = {g0: self._coeff(rng, True)}
        exps = self.window_exps()
        for _ in range(int(rng.random() * (extra + 1)) if exps else 0):
            e = exps[int(rng.random() * len(exps))]
            d[g0 + e] = self._coeff(rng)
        tail = self._above(self.cut_at(g0), rng)
        if tail is not None:
            d[tail] = self._coeff(rng)
        return self.K.make(d)

    def _above(self, cut: Cut, rng: random.Random):
        """A random exponent strictly above the cut (None if none exists)."""
        if cut.c is INF:
            return None
        n = cut.n
        bump = GroupElem((0,) * (n - 1) + (1 + (rng.random() < 0.5),))
        if cut.k == 0:
            if rng.random() < 0.3 and n > 1:
                j = rng.randrange(n - 1)
                bump = GroupElem(tuple(1 if i == j else rng.randint(-2, 2) if i > j else 0 for i in range(n)))
            return cut.c + bump
        m = n - cut.k
        if m == 0:
            return None
        head = list(cut.c[:m])
        head[m - 1] += rng.randint(1, 2)
        return GroupElem(head + [rng.randint(-2, 2) for _ in range(cut.k)])

    def sample(self, rng: random.Random, nonzero: bool = False):
        if not nonzero and rng.random() < 0.05:
            return self.zero
        return self.theta(self.random_series(rng))

    def _small(self, cut: Cut, rng) -> Series:
        """Exact series all of whose terms are above the cut."""
        d = {}
        for _ in range(rng.randint(1, 2)):
            e = self._above(cut, rng)
            if e is not None:
                d[e] = self._coeff(rng, True)
        return self.K.make(d)

    def sample_member(self, S: SumSet, rng: random.Random):
        if S.kind == "singleton":
            return S.witness
        if S.kind == "zeroball":
            if rng.random() < 0.2:
                return self.zero
            return self.theta(self._small(S.cut, rng))
        if S.kind == "ball":
            return self.theta(self.rep(S.witness) + self._small(S.cut, rng))
        return super().sample_member(S, rng)

    def probe(self, S: SumSet, rng: random.Random):
        r = rng.random()
        if r < 0.4 or S.kind == "empty":
            return self.sample(rng)
        if r < 0.8:
            return self.sample_member(S, rng)
        # near miss: perturb a member at the cut itself
        z = self.sample_member(S, rng)
        c = S.cut if S.cut is not None else Cut.of(self.rho, self.val(z))
        if c.c is INF:
            return z
        e = GroupElem(c.c) if c.k == 0 else GroupElem(c.c)
        return self.theta(self.rep(z) + self.K.monomial(e, self._coeff(rng, True)))

    def sample_pair(self, rng: random.Random):
        """Pairs biased toward cancellation so that balls and zero balls occur."""
        x = self.sample(rng)
        r = rng.random()
        if x.payload is None or r < 0.4:
            return x, self.sample(rng)
        if r < 0.55:
            return x, self.neg(x)
        g0 = x.payload[0]
        if r > 0.8:
            y = self._small(self.cut_at(g0), rng)
            return x, (self.zero if y.is_exact_zero() else self.theta(y))
        y = -self.rep(x) + self._small(Cut.of(Segment.zero(self.n), g0), rng)
        if y.is_exact_zero():
            return x, self.zero
        return x, self.theta(y)

    def project_from(self, H: "QuotientHandle", x):
        """Image of an element of a finer quotient H under the canonical map."""
        return self.theta(H.rep(x))


@lru_cache(maxsize=None)
def quotient_of(K: SeriesField, rho: Segment) -> QuotientHandle:
    return QuotientHandle(K, rho)


def quotient_valued(H: Hyperfield, rho: Segment) -> Hyperfield:
    """H_rho for a valued H; returns H itself when rho contains its norm."""
    if not H.has_val:
        raise ValHyperError(f"{H.hid} carries no valuation")
    if seg_leq(H.norm, rho):
        return H
    if isinstance(H, QuotientHandle):
        return quotient_of(H.K, rho)
    # finite: T_rho = 1 + m_rho
    small = [y for y in H.elements() if gt_segment(H.val(y), rho, gzero(H.n))]
    T = set()
    for y in small:
        T |= members(H.add(H.one, y))
    q = factor_hyperfield(H, T)
    vt = {}
    for p in q.carrier:
        vt[p] = H.val(H.elem(p))
    return q.with_valuation(vt, rho, q.hid)


# --------------------------------------------------------- set operations


def set_val(H: Hyperfield, S: SumSet) -> SetVal:
    if S.kind == "empty":
        return SetVal("none")
    if S.kind == "singleton":
        return SetVal("single", value=H.val(S.witness))
    if S.kind == "enum":
        vals = frozenset(H.val(z) for z in S.items)
        if len(vals) == 1:
            return SetVal("single", value=next(iter(vals)))
        return SetVal("many", values=vals)
    if S.kind == "zeroball":
        return SetVal("upset", cut=S.cut)
    # a ball not containing 0 has every member at the witness value
    return SetVal("single", value=H.val(S.witness))


def all_values_exceed(H: Hyperfield, S: SumSet, cut: Cut) -> bool:
    """Every w in S has v(w) above the cut."""
    sv = set_val(H, S)
    if sv.kind == "none":
        return True
    if sv.kind == "single":
        return cut.exceeded_by(sv.value)
    if sv.kind == "many":
        return all(cut.exceeded_by(v) for v in sv.values)
    return cut.leq(sv.cut)


def setwise_sum(H: Hyperfield, A, B) -> frozenset:
    out = set()
    for a in A:
        for b in B:
            out |= members(H.add(a, b))
    return frozenset(out)


def scale_set(H: Hyperfield, x, S: SumSet) -> SumSet:
    if H.is_zero(x):
        return EMPTY if S.kind == "empty" else Singleton(H.zero)
    if S.kind == "empty":
        return S
    if S.kind == "singleton":
        return Singleton(H.mul(x, S.witness))
    if S.kind == "enum":
        return Enumerated(H.mul(x, z) for z in S.items)
    cut = cut_shift(S.cut, H.val(x))
    if S.kind == "zeroball":
        return ZeroBall(cut)
    return Ball(H.mul(x, S.witness), cut)


def _center(H, S):
    return H.zero if S.kind == "zeroball" else S.witness


def intersects(H: Hyperfield, A: SumSet, B: SumSet) -> bool:
    if A.kind == "empty" or B.kind == "empty":
        return False
    if A.kind in ("singleton", "enum"):
        return any(H.member(B, a) for a in members(A))
    if B.kind in ("singleton", "enum"):
        return any(H.member(A, b) for b in members(B))
    # two ultrametric balls meet iff one holds the other's center
    return H.member(B, _center(H, A)) or H.member(A, _center(H, B))


def in_set_plus(H: Hyperfield, A: SumSet, z, p) -> bool:
    """p in A + z, decided through reversibility: (p - z) meets A."""
    if A.kind in ("singleton", "enum", "empty"):
        return any(H.member(H.add(a, z), p) for a in members(A))
    return intersects(H, A, H.sub(p, z))


def add_set(H: Hyperfield, S: SumSet, z) -> SumSet:
    """Closed form of S + z for a ball-shaped S in a valued hyperfield."""
    if S.kind == "singleton":
        return H.add(S.witness, z)
    if H.is_zero(z):
        return S
    cz = Cut.of(H.norm, H.val(z))
    if S.kind == "zeroball":
        return H.make_ball(z, min_cut(S.cut, cz))
    if S.kind == "ball":
        T = H.add(S.witness, z)
        w = H.zero if T.kind == "zeroball" else T.witness
        return H.make_ball(w, min_cut(S.cut, cz))
    raise NotEnumerable("add_set takes ball-shaped sums")


def sumset_equal(H: Hyperfield, A: SumSet, B: SumSet) -> bool:
    if A.kind != B.kind:
        return False
    if A.kind in ("empty", "singleton", "enum"):
        return members(A) == members(B)
    if A.cut != B.cut:
        return False
    return A.kind == "zeroball" or H.member(A, B.witness)


def nary_sum(H: Hyperfield, xs) -> SumSet:
    xs = list(xs)
    if len(xs) < 2:
        raise ValueError("n-ary sum needs at least two summands")
    H.own(*xs)
    if H.finite:
        acc = frozenset([xs[0]])
        for x in xs[1:]:
            acc = setwise_sum(H, acc, [x])
        return Enumerated(acc)
    w = xs[0]
    for x in xs[1:]:
        S = H.add(w, x)
        w = H.zero if S.kind == "zeroball" else S.witness
    m = min(H.val(x) for x in xs)
    return H.make_ball(w, Cut.of(H.norm, m))


def ultrametric_d(H: Hyperfield, x, y):
    H.own(x, y)
    return H.d(x, y)


# --------------------------------------------------------------- checkers


@dataclass
class Report:
    axiom: str
    status: str = "pass"
    witness: object = None
    seed: object = None
    trials: int = 0
    note: str | None = None

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> dict:
        out = {"axiom": self.axiom, "status": self.status, "seed": self.seed, "trials": self.trials}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class Scope:
    kind: str = "exhaustive"
    n: int = 0
    seed: int = 0


Exhaustive = Scope("exhaustive")


def Sampled(n: int, seed: int = 0) -> Scope:
    return Scope("sampled", n, seed)


class _Acc:
    def __init__(self, names, seed):
        self.reports = {a: Report(a, seed=seed) for a in names}

    def tick(self, a):
        self.reports[a].trials += 1

    def check(self, a, ok, witness=None):
        r = self.reports[a]
        r.trials += 1
        if not ok and r.status == "pass":
            r.status = "fail"
            r.witness = witness() if callable(witness) else witness
        return ok

    def out(self):
        return list(self.reports.values())


def _tuples(H: Hyperfield, scope: Scope, k: int):
    if scope.kind == "exhaustive":
        if not H.finite:
            raise NotEnumerable(f"exhaustive scope needs a finite carrier ({H.hid})")
        yield from itertools.product(H.elements(), repeat=k)
        return
    rng = random.Random(scope.seed)
    pair = getattr(H, "sample_pair", None)
    for _ in range(scope.n):
        if pair is not None:
            x, y = pair(rng)
            rest = [H.sample(rng) for _ in range(k - 2)]
            t = [x, y] + rest
            if k > 2 and rng.random() < 0.3:
                rng.shuffle(t)
            yield tuple(t[:k])
        else:
            yield tuple(H.sample(rng) for _ in range(k))


def _f(H, *xs):
    return tuple(H.fmt(x) for x in xs)


def check_canonical_hypergroup(H: Hyperfield, scope: Scope = Exhaustive) -> list[Report]:
    acc = _Acc(["CH1", "CH2", "CH3", "CH4"], scope.seed)
    rng = random.Random(scope.seed + 1)
    zero = H.zero
    for x, y, z in _tuples(H, scope, 3):
        xy = H.add(x, y)
        # CH2
        acc.check("CH2", sumset_equal(H, xy, H.add(y, x)), lambda: {"x": H.fmt(x), "y": H.fmt(y)})
        # CH1
        if H.finite:
            left = setwise_sum(H, members(xy), [z])
            right = setwise_sum(H, [x], members(H.add(y, z)))
            acc.check("CH1", left == right, lambda: {"xyz": _f(H, x, y, z)})
        else:
            yz = H.add(y, z)
            for _ in range(3):
                p = H.probe(add_set(H, xy, z), rng)
                acc.check(
                    "CH1",
                    in_set_plus(H, xy, z, p) == in_set_plus(H, yz, x, p),
                    lambda: {"xyz": _f(H, x, y, z), "probe": H.fmt(p)},
                )
        # CH3: exactly one y' with 0 in x + y'
        if H.finite:
            invs = [w for w in H.elements() if H.member(H.add(x, w), zero)]
            acc.check("CH3", len(invs) == 1, lambda: {"x": H.fmt(x), "inverses": [H.fmt(w) for w in invs]})
        else:
            nx = H.neg(x)
            acc.check("CH3", H.member(H.add(x, nx), zero), lambda: {"x": H.fmt(x)})
            if y != nx:
                acc.check("CH3", not H.member(xy, zero), lambda: {"x": H.fmt(x), "y": H.fmt(y)})
        # CH4: z' in x+y implies x in z'-y
        cands = members(xy) if H.finite else [H.sample_member(xy, rng)]
        for w in cands:
            try:
                ok = H.member(H.sub(w, y), x)
            except ValHyperError:
                ok = False  # -y does not exist
            acc.check("CH4", ok, lambda: {"z": H.fmt(w), "x": H.fmt(x), "y": H.fmt(y)})
    return acc.out()


def check_hyperfield(H: Hyperfield, scope: Scope = Exhaustive) -> list[Report]:
    reps = check_canonical_hypergroup(H, scope)
    hf1 = Report("HF1", seed=scope.seed, trials=sum(r.trials for r in reps))
    bad = [r for r in reps if not r.ok]
    if bad:
        hf1.status = "fail"
        hf1.witness = {bad[0].axiom: bad[0].witness}
    acc = _Acc(["HF2", "HF3", "double-distributivity"], scope.seed)
    zero, one = H.zero, H.one
    for x, y, z in _tuples(H, scope, 3):
        acc.check("HF2", H.mul(x, y) == H.mul(y, x), lambda: {"comm": _f(H, x, y)})
        acc.check("HF2", H.mul(H.mul(x, y), z) == H.mul(x, H.mul(y, z)), lambda: {"assoc": _f(H, x, y, z)})
        acc.check("HF2", H.mul(x, zero) == zero, lambda: {"absorb": _f(H, x)})
        if not H.is_zero(x):
            acc.check("HF2", H.mul(x, one) == x, lambda: {"unit": _f(H, x)})
            try:
                xi = H.inv(x)
                acc.check("HF2", H.mul(x, xi) == one, lambda: {"inverse": _f(H, x)})
            except ValHyperError:
                acc.check("HF2", False, {"inverse": _f(H, x)})
            if not H.is_zero(y):
                acc.check("HF2", not H.is_zero(H.mul(x, y)), lambda: {"zero-divisor": _f(H, x, y)})
        lhs = scale_set(H, x, H.add(y, z))
        rhs = H.add(H.mul(x, y), H.mul(x, z))
        acc.check("HF3", sumset_equal(H, lhs, rhs), lambda: {"xyz": _f(H, x, y, z)})
    if H.finite:
        els = H.elements()
        quads = itertools.product(els, repeat=4) if scope.kind == "exhaustive" else _tuples(H, scope, 4)
        for a, b, c, d in quads:
            lhs = set()
            for u in members(H.add(a, b)):
                for v in members(H.add(c, d)):
                    lhs.add(H.mul(u, v))
            rhs = setwise_sum(
                H,
                setwise_sum(H, members(H.add(H.mul(a, c), H.mul(a, d))), [H.mul(b, c)]),
                [H.mul(b, d)],
            )
            acc.check("double-distributivity", lhs <= rhs, lambda: {"abcd": _f(H, a, b, c, d)})
    else:
        acc.reports["double-distributivity"].status = "skipped"
        acc.reports["double-distributivity"].note = "enumerated instances only"
    return [hf1] + acc.out()


def _skipped(names, H, seed):
    return [Report(a, status="skipped", seed=seed, note=f"{H.hid} carries no valuation") for a in names]


def sample_pairs(H: Hyperfield, scope: Scope) -> list:
    """Materialize the pair stream once so several checkers can share it."""
    return list(_tuples(H, scope, 2))


def check_valuation(H: Hyperfield, scope: Scope = Exhaustive, pairs=None) -> list[Report]:
    names = ["V0", "V1", "V2", "V3", "V4"]
    if not H.has_val:
        return _skipped(names, H, scope.seed)
    acc = _Acc(names, scope.seed)
    rng = random.Random(scope.seed + 2)
    rho = H.norm
    v4_fails = []
    for x, y in pairs if pairs is not None else _tuples(H, scope, 2):
        vx, vy = H.val(x), H.val(y)
        # V0 in the form (v(x) = inf iff x = 0)
        acc.check("V0", (vx is INF) == H.is_zero(x), lambda: {"x": H.fmt(x), "v": repr(vx)})
        acc.check("V1", H.val(H.mul(x, y)) == vx + vy, lambda: {"xy": _f(H, x, y)})
        S = H.add(x, y)
        m = min(vx, vy)
        cut = Cut.of(rho, m)
        zs = list(members(S)) if H.finite else [H.sample_member(S, rng)]
        for z in zs:
            acc.check("V2", H.val(z) >= m, lambda: {"xy": _f(H, x, y), "z": H.fmt(z)})
        if not H.member(S, H.zero):
            sv = set_val(H, S)
            ok = sv.kind == "single" and all(H.val(z) == sv.value for z in zs)
            acc.check("V3", ok, lambda: {"xy": _f(H, x, y), "sum": H.fmt_set(S)})
        # V4: for z in x+y, z' in x+y iff every w in z - z' is above rho + m
        probes = H.elements() if H.finite else [H.probe(S, rng) for _ in range(2)]
        for z in zs:
            for z2 in probes:
                lhs = H.member(S, z2)
                rhs = all_values_exceed(H, H.sub(z, z2), cut)
                acc.tick("V4")
                if lhs != rhs:
                    v4_fails.append((lhs and z != z2 and not H.is_zero(x) and not H.is_zero(y), x, y, z, z2, lhs))
    if v4_fails:
        # prefer a witness showing two distinct members that the norm forbids
        v4_fails.sort(key=lambda t: not t[0])
        _, x, y, z, z2, lhs = v4_fails[0]
        r = acc.reports["V4"]
        r.status = "fail"
        pair = ",".join(H.fmt(e) for e in sorted({z, z2}, key=_sort_key))
        if lhs:
            r.witness = f"{H.fmt(x)}+{H.fmt(y)} ⊇ {{{pair}}}"
        else:
            r.witness = f"{H.fmt(z2)} ∉ {H.fmt(x)}+{H.fmt(y)} although {H.fmt(z)}-{H.fmt(z2)} is small"
    return acc.out()


def check_val_lemma(H: Hyperfield, scope: Scope = Exhaustive, pairs=None) -> list[Report]:
    names = ["(i)", "(ii)", "(iii)", "(iv)", "x∈x+y ⇒ x+y={x}"]
    if not H.has_val:
        return _skipped(names, H, scope.seed)
    acc = _Acc(names, scope.seed)
    rng = random.Random(scope.seed + 3)
    z0 = gzero(H.n)
    one = H.one
    acc.check("(i)", H.val(one) == z0 and H.val(H.neg(one)) == z0, lambda: {"v(1)": repr(H.val(one)), "v(-1)": repr(H.val(H.neg(one)))})
    lemma = names[4]
    for x, y in pairs if pairs is not None else _tuples(H, scope, 2):
        vx, vy = H.val(x), H.val(y)
        acc.check("(ii)", H.val(H.neg(x)) == vx, lambda: {"x": H.fmt(x)})
        if not H.is_zero(x):
            acc.check("(iii)", H.val(H.inv(x)) == -vx, lambda: {"x": H.fmt(x)})
        S = H.add(x, y)
        zs = list(members(S)) if H.finite else [H.sample_member(S, rng)]
        if vx != vy:
            m = min(vx, vy)
            for z in zs:
                acc.check("(iv)", H.val(z) == m, lambda: {"xy": _f(H, x, y), "z": H.fmt(z)})
        if H.member(S, x):
            acc.check(lemma, S.kind == "singleton" and S.witness == x, lambda: {"xy": _f(H, x, y), "sum": H.fmt_set(S)})
        else:
            acc.tick(lemma)
    return acc.out()


def all_pass(reports) -> bool:
    return all(r.ok for r in reports)
