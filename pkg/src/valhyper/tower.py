"""Isometric homomorphisms, towers of quotients H_{rho_i}(K) and their inverse
limits.

Limit elements are lazy compatible sequences: a resolver computes the stage-i
component on demand and a memo keeps it.  LimitView handles are meant for
single-threaded use; the memo is a plain dict.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import (
    DoublingUnavailable,
    InsufficientPrecision,
    NotSurjective,
    SegmentsNotIncreasing,
    Undetermined,
    ValHyperError,
)
from .groundfield import Series, SeriesField, ground_field
from .hyperfield import (
    Ball,
    Hyperfield,
    HyperElem,
    Report,
    Sampled,
    Scope,
    Singleton,
    SumSet,
    ZeroBall,
    _Acc,
    _prec_above,
    add_set,
    intersects,
    min_cut,
    nary_sum,
    quotient_of,
    set_val,
)
from .ogroup import (
    INF,
    Cut,
    GroupElem,
    Segment,
    leading_index,
    seg_double_leq,
    seg_leq,
    seg_shift_leq,
    zero as gzero,
)
from .groundfield import _multiple_reaching


# ------------------------------------------------------- isometric maps


@dataclass
class IsometricMap:
    """A map between valued handles with the same value group.

    ``lift`` (optional) picks a preimage for a target element; it is used
    for the surjectivity part of induced_iso.
    """

    source: Hyperfield
    target: Hyperfield
    fn: Callable
    lift: Callable | None = None
    name: str = "theta"

    def __call__(self, x):
        return self.fn(x)


def identity_map(H: Hyperfield) -> IsometricMap:
    return IsometricMap(H, H, lambda x: x, lambda x: x, name="id")


def fiber(theta: IsometricMap, x) -> SumSet:
    """theta^{-1}(theta(x)) as a ball of the source: x times 1 + m_{N'}."""
    src = theta.source
    if src.is_zero(x):
        return Singleton(x)
    return src.make_ball(x, Cut.of(theta.target.norm, src.val(x)))


def _neg_set(H, S: SumSet) -> SumSet:
    if S.kind == "singleton":
        return Singleton(H.neg(S.witness))
    if S.kind == "ball":
        return Ball(H.neg(S.witness), S.cut)
    return S


def preimage_sum_contains(theta: IsometricMap, x, y, z) -> bool:
    """z in theta^{-1}(theta x) + theta^{-1}(theta y), via reversibility."""
    src = theta.source
    Fx, Fy = fiber(theta, x), fiber(theta, y)
    return intersects(src, add_set(src, _neg_set(src, Fy), z), Fx)


def _pairs_of(H, rng):
    pair = getattr(H, "sample_pair", None)
    return pair(rng) if pair else (H.sample(rng), H.sample(rng))


def check_isometric(theta: IsometricMap, scope: Scope = Sampled(100)) -> list[Report]:
    """IH1, IH2', IH3 on samples, IH2 in both directions, and IH2 <=> IH2'."""
    src, tgt = theta.source, theta.target
    acc = _Acc(["IH1", "IH2'", "IH3", "IH2", "IH2<=>IH2'"], scope.seed)
    rng = random.Random(scope.seed)
    f = src.fmt
    acc.check("IH3", tgt.is_zero(theta(src.zero)), {"theta(0)": tgt.fmt(theta(src.zero))})
    for _ in range(scope.n):
        x, y = _pairs_of(src, rng)
        tx, ty = theta(x), theta(y)
        acc.check("IH1", theta(src.mul(x, y)) == tgt.mul(tx, ty), lambda: {"xy": (f(x), f(y))})
        acc.check("IH3", tgt.val(tx) == src.val(x), lambda: {"x": f(x), "v": repr(src.val(x)), "v'": repr(tgt.val(tx))})
        S, T = src.add(x, y), tgt.add(tx, ty)
        for z in {S.witness or src.zero, src.sample_member(S, rng)} if S.kind != "zeroball" else {src.sample_member(S, rng)}:
            acc.check("IH2'", tgt.member(T, theta(z)), lambda: {"xy": (f(x), f(y)), "z": f(z)})
        # IH2: z in preimage sum  <=>  theta(z) in theta x + theta y
        probes = [src.probe(S, rng), src.sample_member(add_set(src, fiber(theta, x), y), rng)]
        for z in probes:
            lhs = preimage_sum_contains(theta, x, y, z)
            rhs = tgt.member(T, theta(z))
            acc.check("IH2", lhs == rhs, lambda: {"xy": (f(x), f(y)), "z": f(z), "in preimage sum": lhs})
    rep = acc.reports
    ih2p = rep["IH2'"].ok and tgt.is_zero(theta(src.zero))
    acc.check(
        "IH2<=>IH2'",
        rep["IH2"].ok == ih2p,
        lambda: {"IH2": rep["IH2"].status, "IH2'": rep["IH2'"].status},
    )
    return acc.out()


@dataclass
class IsoWitness:
    """The induced map [a] -> theta(a) and its sampled verification."""

    theta: IsometricMap
    reports: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports)

    def __call__(self, x):
        return self.theta(x)

    def to_json(self) -> dict:
        return {"map": self.theta.name, "ok": self.ok, "reports": [r.to_json() for r in self.reports]}


def induced_iso(theta: IsometricMap, scope: Scope = Sampled(100)) -> IsoWitness:
    """Verify that [a]_{N'} -> theta(a) is an isomorphism H_{N'} -> target.

    Classes of the source are fibers (balls of radius N' + v(a)); equality,
    products and sums of classes are computed in the source and compared
    with the target.
    """
    src, tgt = theta.source, theta.target
    acc = _Acc(["bijective", "multiplicative", "additive", "isometric"], scope.seed)
    rng = random.Random(scope.seed + 5)
    f = src.fmt
    for _ in range(scope.n):
        x, y = _pairs_of(src, rng)
        tx, ty = theta(x), theta(y)
        # injective on classes
        x2 = src.sample_member(fiber(theta, x), rng)
        for u in (x2, y):
            same = src.member(fiber(theta, x), u)
            acc.check("bijective", same == (theta(u) == tx), lambda: {"x": f(x), "u": f(u), "same class": same})
        acc.check("multiplicative", theta(src.mul(x2, y)) == tgt.mul(tx, ty), lambda: {"xy": (f(x2), f(y))})
        acc.check("isometric", tgt.val(tx) == src.val(x2), lambda: {"x": f(x2)})
        S = src.add(x, y)
        for z in (src.probe(S, rng), src.sample_member(add_set(src, fiber(theta, x), y), rng)):
            lhs = preimage_sum_contains(theta, x, y, z)
            rhs = tgt.member(tgt.add(tx, ty), theta(z))
            acc.check("additive", lhs == rhs, lambda: {"xy": (f(x), f(y)), "z": f(z)})
        # surjective
        t = tgt.sample(rng)
        if theta.lift is not None:
            pre = theta.lift(t)
            if theta(pre) != t:
                raise NotSurjective(f"lift of {tgt.fmt(t)} maps to {tgt.fmt(theta(pre))}")
        else:
            if not any(theta(src.sample(rng)) == t for _ in range(200)):
                raise NotSurjective(f"no preimage found for {tgt.fmt(t)}")
        acc.tick("bijective")
    return IsoWitness(theta, acc.out())


# ---------------------------------------------------------------- towers


@dataclass
class Tower:
    """Stages H_{rho_i}(K), i = 0, 1, ..., with window-truncation maps.

    ``doubling`` maps i to a stage n(i) with 2*rho_i inside rho_{n(i)}; it
    is None when no such function exists.  ``union`` is the union of the
    rho_i when it is an initial segment of the supported shapes.
    """

    K: SeriesField
    rho_gen: Callable[[int], Segment]
    name: str = "tower"
    doubling: Callable[[int], int] | None = None
    union: Segment | None = None
    descriptor: dict = field(default_factory=dict)
    why_no_doubling: str = ""

    def rho(self, i: int) -> Segment:
        if i < 0:
            raise ValueError("stages are indexed from 0")
        return self.rho_gen(i)

    def stage(self, i: int):
        return quotient_of(self.K, self.rho(i))

    def theta(self, j: int, i: int, x):
        """theta_{j,i}: H_j -> H_i for i <= j."""
        if i > j:
            raise ValueError("maps go from finer to coarser stages")
        if i == j:
            return x
        return self.stage(i).project_from(self.stage(j), x)

    def map(self, j: int, i: int) -> IsometricMap:
        Hj, Hi = self.stage(j), self.stage(i)
        return IsometricMap(
            Hj, Hi, lambda x: self.theta(j, i, x), lambda t: Hj.theta(Hi.rep(t)), name=f"theta[{j},{i}]"
        )

    def n(self, i: int) -> int:
        if self.doubling is None:
            raise DoublingUnavailable(f"{self.name}: {self.why_no_doubling or 'no doubling function'}")
        return self.doubling(i)

    def check_doubling(self, upto: int = 16) -> bool:
        return self.doubling is not None and all(
            seg_double_leq(self.rho(i), self.rho(self.doubling(i))) for i in range(upto + 1)
        )

    def doubling_pairs(self, upto: int = 8):
        """Every (i, j) with i <= j <= upto and 2*rho_i inside rho_j."""
        return [
            (i, j) for i in range(upto + 1) for j in range(i, upto + 1) if seg_double_leq(self.rho(i), self.rho(j))
        ]

    def check_composition(self, scope: Scope = Sampled(20), stages: int = 4) -> Report:
        r = Report("theta_ji o theta_kj = theta_ki", seed=scope.seed)
        rng = random.Random(scope.seed)
        for i, j, k in itertools.combinations(range(stages + 1), 3):
            Hk = self.stage(k)
            for _ in range(scope.n):
                x = Hk.sample(rng)
                r.trials += 1
                if self.theta(j, i, self.theta(k, j, x)) != self.theta(k, i, x) and r.status == "pass":
                    r.status = "fail"
                    r.witness = {"ijk": (i, j, k), "x": Hk.fmt(x)}
        return r

    def to_json(self) -> dict:
        return dict(self.descriptor, name=self.name, union=None if self.union is None else str(self.union))


def canonical_tower(K: SeriesField, rho_gen, name: str = "tower", doubling=None, union=None, check_upto: int = 8) -> Tower:
    """The canonical isometric system of K along increasing segments rho_gen(i)."""
    for i in range(check_upto):
        if not seg_leq(rho_gen(i), rho_gen(i + 1)):
            raise SegmentsNotIncreasing(f"rho_{i} = {rho_gen(i)} is not inside rho_{i + 1} = {rho_gen(i + 1)}")
    T = Tower(K, rho_gen, name, doubling, union)
    if doubling is not None and not T.check_doubling(check_upto):
        raise ValHyperError("the supplied doubling function does not double the segments")
    return T


def linear_tower(K: SeriesField, base, step, name: str | None = None) -> Tower:
    """rho_i = UpTo(base + i*step), with doubling function and union worked out."""
    n = K.n
    base, step = GroupElem(base), GroupElem(step)
    if len(base) != n or len(step) != n:
        raise ValueError("base and step need one coordinate per variable")
    if step < gzero(n):
        raise SegmentsNotIncreasing("the step must be nonnegative")
    gen = lambda i: Segment.upto(base + i * step)  # noqa: E731
    j = leading_index(step)
    union = doubling = None
    why = ""
    if j is None:
        union = gen(0)
        if base.is_zero():
            doubling = lambda i: i  # noqa: E731
        else:
            why = "constant nonzero segments never double"
    elif any(base[:j]):
        why = f"base {base!r} is nonzero above the coordinate the step {step!r} moves"
    else:
        union = Segment.cone(n - j, n)
        m = _multiple_reaching(step, base)
        doubling = lambda i: 2 * i + m  # noqa: E731
    T = canonical_tower(K, gen, name or f"{K.name}:{base!r}+i*{step!r}", doubling, union)
    T.why_no_doubling = why
    T.descriptor = {"ground": K.name, "segments": {"base": list(base), "step": list(step)}}
    return T


BUILTIN_TOWERS = {
    "paper-0n": ("q2", (0, 0), (0, 1)),
    "paper-n0": ("q2", (0, 0), (1, 0)),
    "paper-1m": ("q2", (1, 0), (0, 1)),
    "f3": ("f3", (0,), (1,)),
}


def builtin_tower(name: str) -> Tower:
    if name not in BUILTIN_TOWERS:
        raise ValueError(f"unknown tower {name!r}; choose one of {', '.join(BUILTIN_TOWERS)}")
    g, b, s = BUILTIN_TOWERS[name]
    return linear_tower(ground_field(g), b, s, name)


def tower_from_json(text: str) -> Tower:
    d = json.loads(text)
    seg = d["segments"]
    return linear_tower(ground_field(d["ground"]), seg["base"], seg["step"], d.get("name"))


# ----------------------------------------------------------- limit elements


class LimitElem:
    """A compatible sequence (a_i) given by a resolver i -> element of H_i.

    ``ground`` (over ``den`` when that is set) is an exact element of K
    whose images are the a_i, when one is known.  It lets sums decide
    exactly whether 0 lies in every stage.
    """

    __slots__ = ("L", "resolver", "memo", "ground", "label", "den")

    def __init__(self, L: "LimitView", resolver, ground: Series | None = None, label: str = "", den: Series | None = None):
        self.L = L
        self.resolver = resolver
        self.memo = {}
        self.ground = ground
        self.label = label
        self.den = den

    @property
    def poly(self):
        """The ground series when it has no denominator."""
        return self.ground if self.den is None else None

    def at(self, i: int):
        x = self.memo.get(i)
        if x is None:
            x = self.resolver(i)
            self._check(i, x)
            self.memo[i] = x
        return x

    def _check(self, i, x):
        T = self.L.T
        lower = [j for j in self.memo if j < i]
        upper = [j for j in self.memo if j > i]
        if lower:
            j = max(lower)
            if T.theta(i, j, x) != self.memo[j]:
                raise ValHyperError(f"incompatible stages {j} and {i} in {self.label or 'limit element'}")
        if upper:
            j = min(upper)
            if T.theta(j, i, self.memo[j]) != x:
                raise ValHyperError(f"incompatible stages {i} and {j} in {self.label or 'limit element'}")

    def eq_up_to(self, other: "LimitElem", i: int) -> bool:
        # compatibility makes stage i decide every stage below it
        return self.at(i) == other.at(i)

    def __eq__(self, other):
        if not isinstance(other, LimitElem):
            return NotImplemented
        if self is other:
            return True
        if self.ground is not None and other.ground is not None:
            return self._exact_eq(other)
        return self.eq_up_to(other, self.L.budget)

    def _exact_eq(self, other) -> bool:
        # a = b in the limit iff a - b is 0 or has value above v(a) + N
        ga, gb = self.ground, other.ground
        if ga.is_exact_zero() or gb.is_exact_zero():
            return ga.is_exact_zero() and gb.is_exact_zero()
        da, db = self.den, other.den
        num = _times(ga, db) - _times(gb, da)
        if num.is_exact_zero():
            return True
        va = ga.val() - (da.val() if da is not None else 0 * ga.val())
        dd = _times(da, db)
        vd = num.val() - (dd.val() if dd is not None else 0 * ga.val())
        return Cut.of(self.L.norm, va).exceeded_by(vd)

    def __hash__(self):
        return hash(self.at(0))

    def __repr__(self):
        return f"LimitElem({self.L.fmt_elem(self)})"


class LimitView(Hyperfield):
    """The inverse limit of a tower as a valued hyperfield handle.

    Equality of elements is decided at stage ``budget``; sums look for the
    first stage avoiding 0 up to ``max_stage`` unless ground series decide
    it exactly.
    """

    def __init__(self, T: Tower, budget: int = 8, max_stage: int = 64):
        self.T = T
        self.K = T.K
        self.n = T.K.n
        self.budget = budget
        self.max_stage = max_stage
        self.norm = T.union
        self.hid = f"lim[{T.name}]"
        self.stringent = True
        self.field_mode = T.union.kind == "cone" and T.union.k == self.n
        self.zero = self.from_ground(self.K.zero())
        self.one = self.from_ground(self.K.one())
        self._sampler = quotient_of(self.K, T.rho(min(budget, 4)))

    def __repr__(self):
        return f"LimitView({self.T.name}, budget={self.budget})"

    # -- constructors
    def wrap(self, e: LimitElem) -> HyperElem:
        return self.elem(e)

    def from_ground(self, g: Series, label: str = "") -> HyperElem:
        if not g.is_exact:
            raise InsufficientPrecision("ground representatives must be exact series")
        T = self.T
        return self.wrap(LimitElem(self, lambda i: T.stage(i).theta(g), g, label))

    def from_rf(self, text: str) -> HyperElem:
        """Stagewise expansion of a rational function (no ground series)."""
        from .groundfield import parse_rf, to_fraction

        T = self.T
        n, d = to_fraction(parse_rf(text, self.K.vars), self.K)
        if d.terms == self.K.one().terms:
            d = None
        return self.wrap(LimitElem(self, lambda i: T.stage(i).from_rf(text), n, text, den=d))

    def from_coeffs(self, lead, coeff, direction=None, label: str = "", cap: int = 10000) -> HyperElem:
        """sum_k coeff(k) t^(lead + k*direction); coeff(0) must be nonzero."""
        T, F = self.T, self.K.base
        lead = GroupElem(lead)
        direction = GroupElem(direction or (0,) * (self.n - 1) + (1,))
        if F.is_zero(F.coerce(coeff(0))):
            raise ValueError("the leading coefficient must be nonzero")

        def resolve(i):
            H = T.stage(i)
            cut = Cut.of(T.rho(i), lead)
            terms = []
            for k in itertools.count():
                e = lead + k * direction
                if cut.exceeded_by(e):
                    break
                if k > cap:
                    raise InsufficientPrecision(f"stage {i} needs infinitely many coefficients")
                c = F.coerce(coeff(k))
                if not F.is_zero(c):
                    terms.append((e, c))
            return H._window(terms)

        return self.wrap(LimitElem(self, resolve, None, label))

    def monomial(self, g, c=None) -> HyperElem:
        return self.from_ground(self.K.monomial(g, c))

    def stage_elem(self, x, i: int):
        self.own(x)
        return x.payload.at(i)

    # -- structure
    def is_zero(self, x) -> bool:
        return x.payload.at(0).payload is None

    def val(self, x):
        return self.T.stage(0).val(x.payload.at(0))

    def fmt_elem(self, e: LimitElem) -> str:
        b = self.budget
        return f"{self.T.stage(b).fmt(e.at(b))}@{b}"

    def fmt(self, x) -> str:
        return self.fmt_elem(x.payload)

    def to_json(self, x):
        b = min(self.budget, 3)
        return {"budget": self.budget, "stages": {str(i): self.T.stage(i).to_json(x.payload.at(i)) for i in range(b + 1)}}

    def _unary(self, x, op, ground, den=None):
        T = self.T
        e = x.payload
        return self.wrap(LimitElem(self, lambda i: op(T.stage(i), e.at(i)), ground, den=den))

    def neg(self, x):
        self.own(x)
        g = x.payload.ground
        return self._unary(x, lambda H, a: H.neg(a), None if g is None else -g, x.payload.den)

    def inv(self, x):
        self.own(x)
        if self.is_zero(x):
            from .errors import ZeroDivision

            raise ZeroDivision("inverse of 0")
        e = x.payload
        g = e.ground
        if g is None:
            return self._unary(x, lambda H, a: H.inv(a), None)
        if e.den is None and len(g.terms) == 1:
            return self._unary(x, lambda H, a: H.inv(a), g.inverse(None))
        # keep the inverse exact as a fraction
        return self._unary(x, lambda H, a: H.inv(a), e.den if e.den is not None else self.K.one(), g)

    def mul(self, x, y):
        self.own(x, y)
        a, b = x.payload, y.payload
        T = self.T
        g = den = None
        if a.ground is not None and b.ground is not None:
            g = a.ground * b.ground
            if a.den is not None or b.den is not None:
                den = _times(a.den, b.den)
        return self.wrap(LimitElem(self, lambda i: T.stage(i).mul(a.at(i), b.at(i)), g, den=den))

    def add(self, x, y) -> SumSet:
        return triple_sum_resolve(self, x, y, self.zero)

    def d(self, x, y):
        return limit_d(self, x, y)

    # -- sampling
    def sample(self, rng: random.Random, nonzero: bool = False):
        if not nonzero and rng.random() < 0.05:
            return self.zero
        return self.from_ground(self._sampler.random_series(rng))

    def _small(self, cut: Cut, rng):
        s = self._sampler._small(cut, rng)
        return self.zero if s.is_exact_zero() else self.from_ground(s)

    def sample_member(self, S: SumSet, rng: random.Random):
        if S.kind == "singleton":
            return S.witness
        if S.kind == "zeroball":
            if rng.random() < 0.2:
                return self.zero
            return self._small(S.cut, rng)
        if S.kind == "ball":
            g = S.witness.payload.poly
            if g is None:
                return S.witness
            s = g + self._sampler._small(S.cut, rng)
            return self.zero if s.is_exact_zero() else self.from_ground(s)
        return super().sample_member(S, rng)

    def probe(self, S: SumSet, rng: random.Random):
        r = rng.random()
        if r < 0.4 or S.kind == "empty":
            return self.sample(rng)
        z = self.sample_member(S, rng)
        if r < 0.8 or z.payload.poly is None:
            return z
        c = S.cut if S.cut is not None else Cut.of(self.norm, self.val(z))
        if c.c is INF:
            return z
        s = z.payload.poly + self.K.monomial(GroupElem(c.c), self._sampler._coeff(rng, True))
        return self.zero if s.is_exact_zero() else self.from_ground(s)

    def sample_pair(self, rng: random.Random):
        x = self.sample(rng)
        r = rng.random()
        if self.is_zero(x) or r < 0.4:
            return x, self.sample(rng)
        if r < 0.55:
            return x, self.neg(x)
        g = x.payload.poly
        if r > 0.8 or g is None:
            return x, self._small(Cut.of(self.norm, self.val(x)), rng)
        y = -g + self._sampler._small(Cut.of(Segment.zero(self.n), g.val()), rng)
        return x, (self.zero if y.is_exact_zero() else self.from_ground(y))

    def sample_triple(self, rng: random.Random):
        x, y = self.sample_pair(rng)
        r = rng.random()
        if r < 0.4:
            z = self.sample(rng)
        elif r < 0.7 and not self.is_zero(x):
            # cancel the leading part of x + y up to a small perturbation
            S = self.add(x, y)
            w = S.witness if S.kind == "singleton" else self.zero
            g = w.payload.poly
            if g is None or g.is_exact_zero():
                z = self.sample(rng)
            else:
                s = -g + self._sampler._small(Cut.of(Segment.zero(self.n), g.val()), rng)
                z = self.zero if s.is_exact_zero() else self.from_ground(s)
        else:
            z = self._small(Cut.of(self.norm, self.val(x)), rng) if not self.is_zero(x) else self.sample(rng)
        t = [x, y, z]
        rng.shuffle(t)
        return tuple(t)


def limit_hyperfield(T: Tower, budget: int = 8, max_stage: int = 64, witness: bool = False) -> LimitView:
    """The inverse limit of T, refused unless the doubling hypothesis holds."""
    if T.doubling is None or not T.check_doubling() or T.union is None:
        diag = {"tower": T.name, "reason": T.why_no_doubling or "no doubling function"}
        diag["doubling pairs found (i<=j<=8)"] = len(T.doubling_pairs(8))
        if witness:
            a, b = paper_pair(T.K)
            diag["emptiness"] = detect_empty_sum(T, a, b, 3).to_json()
        raise DoublingUnavailable(f"{T.name}: the segments never double ({diag['reason']})", diag)
    return LimitView(T, budget, max_stage)


# ------------------------------------------------------------ sums in the limit


def _stage_sum(L: LimitView, elems, i):
    return nary_sum(L.T.stage(i), [e.at(i) for e in elems])


def _zero_sum(L: LimitView, cut: Cut) -> SumSet:
    if L.field_mode:
        return Singleton(L.zero)
    return ZeroBall(cut)


def first_nonzero_stage(L: LimitView, elems, cap: int):
    """First stage whose sum avoids 0, or None if there is none up to cap."""
    for j in range(cap + 1):
        S = _stage_sum(L, elems, j)
        if S.kind != "zeroball":
            return j
    return None


def triple_sum_resolve(L: LimitView, a, b, c, adaptive: bool = True) -> SumSet:
    """a + b + c in the limit.

    Either 0 lies in every stage sum (a zero ball of radius N + min value),
    or the sum is one element l with l_i taken from a stage sum far enough
    up that all its members agree after projecting to stage i.
    """
    L.own(a, b, c)
    xs = [x for x in (a, b, c) if not L.is_zero(x)]
    if not xs:
        return Singleton(L.zero)
    if len(xs) == 1:
        return Singleton(xs[0])
    elems = [x.payload for x in xs]
    m = min(L.val(x) for x in xs)
    zcut = Cut.of(L.norm, m)
    grounds = [e.ground for e in elems]
    s = den = None
    if all(g is not None for g in grounds):
        s, den = _fraction_sum(elems)
        if s.is_exact_zero() or zcut.exceeded_by(s.val() - (den.val() if den is not None else 0 * m)):
            return _zero_sum(L, zcut)
        cap = 16 * L.max_stage
    else:
        cap = L.max_stage
    j0 = first_nonzero_stage(L, elems, cap)
    if j0 is None:
        raise Undetermined(f"0 lies in every stage sum up to stage {cap} (>= {L.T.rho(cap)})")
    T = L.T

    def resolve(i):
        if i < j0:
            return T.theta(j0, i, l.at(j0))
        Si = _stage_sum(L, elems, i)
        vl = set_val(T.stage(i), Si).value
        k = T.n(i)
        if adaptive:
            rho_i = T.rho(i)
            k = next((j for j in range(i, k + 1) if seg_shift_leq(rho_i, vl - m, T.rho(j))), k)
        Sk = _stage_sum(L, elems, k)
        return T.theta(k, i, Sk.witness)

    l = LimitElem(L, resolve, s, den=den)
    return Singleton(L.wrap(l))


def _times(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a * b


def _fraction_sum(elems):
    """sum of ground_i / den_i as (numerator, denominator or None)."""
    dens = [e.den for e in elems]
    if all(d is None for d in dens):
        s = elems[0].ground
        for e in elems[1:]:
            s = s + e.ground
        return s, None
    num = None
    for i, e in enumerate(elems):
        t = e.ground
        for j, d in enumerate(dens):
            if j != i and d is not None:
                t = t * d
        num = t if num is None else num + t
    den = None
    for d in dens:
        den = _times(den, d)
    return num, den


def limit_val(L: LimitView, a):
    L.own(a)
    return L.val(a)


def limit_d(L: LimitView, a, b):
    """Value of a - b, read at the first stage where a and b differ."""
    L.own(a, b)
    ea, eb = a.payload, b.payload
    if ea.ground is not None and eb.ground is not None:
        if ea._exact_eq(eb):
            return INF
        num = _times(ea.ground, eb.den) - _times(eb.ground, ea.den)
        dd = _times(ea.den, eb.den)
        return num.val() - (dd.val() if dd is not None else 0 * num.val())
    for i in range(L.budget + 1):
        x, y = ea.at(i), eb.at(i)
        if x != y:
            return L.T.stage(i).d(x, y)
    raise Undetermined(f"equal through stage {L.budget}: distance >= {L.T.rho(L.budget)}")


def projection(L: LimitView, i: int) -> IsometricMap:
    H = L.T.stage(i)
    return IsometricMap(L, H, lambda x: x.payload.at(i), lambda t: L.from_ground(H.rep(t)), name=f"theta[{i}]")


def limit_factor_iso(L: LimitView, i: int, scope: Scope = Sampled(100)) -> IsoWitness:
    """[a]_{N_i} -> a_i, checked through the projection to stage i."""
    th = projection(L, i)
    iso = induced_iso(th, scope)
    iso.reports = check_isometric(th, Scope("sampled", scope.n, scope.seed + 1)) + iso.reports
    return iso


def check_claim1(L: LimitView, scope: Scope = Sampled(1000), stages: int = 3) -> list[Report]:
    """Uniqueness of the resolved triple sum, probed at stages 0..stages.

    At each stage i avoiding 0, two members of the stage sum at n(i) must
    project to the same element of H_i, which must also be the resolved l_i
    (computed by both the adaptive and the plain n(i) rule).
    """
    acc = _Acc(["unique projection", "resolved member", "adaptive = plain", "l_i in a_i+b_i+c_i"], scope.seed)
    rng = random.Random(scope.seed)
    T = L.T
    for _ in range(scope.n):
        a, b, c = L.sample_triple(rng)
        S = triple_sum_resolve(L, a, b, c)
        S2 = triple_sum_resolve(L, a, b, c, adaptive=False)
        elems = [x.payload for x in (a, b, c)]
        for i in range(stages + 1):
            Si = _stage_sum(L, elems, i)
            if Si.kind == "zeroball":
                if S.kind == "singleton":
                    acc.check("l_i in a_i+b_i+c_i", T.stage(i).member(Si, S.witness.payload.at(i)), {"stage": i})
                continue
            n = T.n(i)
            Hn = T.stage(n)
            Sn = _stage_sum(L, elems, n)
            u, w = Sn.witness, Hn.sample_member(Sn, rng)
            pu, pw = T.theta(n, i, u), T.theta(n, i, w)
            acc.check("unique projection", pu == pw, lambda: {"stage": i, "members": (Hn.fmt(u), Hn.fmt(w))})
            ok = S.kind == "singleton" and S.witness.payload.at(i) == pu
            acc.check("resolved member", ok, lambda: {"stage": i, "triple": tuple(L.fmt(x) for x in (a, b, c))})
            acc.check("adaptive = plain", S2.kind == "singleton" and S2.witness.payload.at(i) == pu, {"stage": i})
            acc.check("l_i in a_i+b_i+c_i", T.stage(i).member(Si, pu), {"stage": i})
    return acc.out()


# -------------------------------------------------------- emptiness witness


def paper_pair(K: SeriesField):
    """a_n = sum_{i<n} x^i and b_n = y * a_n, as ground series per stage."""
    F = K.base
    n = K.n
    x = GroupElem((0,) * (n - 1) + (1,))
    y = GroupElem((1,) + (0,) * (n - 1)) if n > 1 else x

    def a(k):
        return K.make({i * x: F.one for i in range(k)})

    def b(k):
        return K.make({y + i * x: F.one for i in range(k)})

    return a, b


@dataclass
class EmptinessReport:
    status: str  # empty | nonempty | inconclusive
    m_max: int
    stages: tuple = ()
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"status": self.status, "m_max": self.m_max, "stages": list(self.stages)}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _ball_meets(c1, r1: Cut, c2, r2: Cut) -> bool:
    """Do {z : v(z - c1) > r1} and {z : v(z - c2) > r2} meet?  (ultrametric)"""
    d = (c1 - c2)
    dv = INF if d.is_exact_zero() else d.val()
    return r1.exceeded_by(dv) or r2.exceeded_by(dv)


def detect_empty_sum(T: Tower, a, b, m_max: int) -> EmptinessReport:
    """Search stages 1..m_max for a compatible choice c_n in a_n + b_n.

    a and b give a ground series for each stage.  The elements of K whose
    class lies in a_n + b_n form a ball P_n; a compatible family has nested
    fibers inside the P_n, so two disjoint P_n rule it out.  If all P_n meet,
    the center of the smallest one gives a compatible family.
    """
    stages = list(range(1, m_max + 1))
    if len(stages) < 2:
        return EmptinessReport("inconclusive", m_max, tuple(stages))
    K = T.K
    balls = []
    for n in stages:
        H, rho = T.stage(n), T.rho(n)
        S = H.add(H.theta(a(n)), H.theta(b(n)))
        if S.kind == "zeroball":
            balls.append((n, K.zero(), S.cut, S))
            continue
        w = S.witness
        r = Cut.of(rho, H.val(w))
        if S.kind == "ball":
            r = min_cut(S.cut, r)
        balls.append((n, H.rep(w), r, S))
    for (n1, c1, r1, S1), (n2, c2, r2, S2) in itertools.combinations(balls, 2):
        if not _ball_meets(c1, r1, c2, r2):
            H1, H2 = T.stage(n1), T.stage(n2)
            wit = {
                f"a_{n1}+b_{n1}": H1.fmt_set(S1),
                f"a_{n2}+b_{n2}": H2.fmt_set(S2),
                f"theta_{n2},{n1}(a_{n2}+b_{n2})": H1.fmt_set(_project_set(T, n2, n1, S2)),
                "distance": repr((c1 - c2).val()),
            }
            return EmptinessReport("empty", m_max, (n1, n2), wit)
    # all balls meet pairwise, hence are nested: the smallest one sits in all
    n0, c, r, _ = balls[0]
    for t in balls[1:]:
        if r.leq(t[2]):
            n0, c, r, _ = t
    fam = [T.stage(n).theta(c) if not c.is_exact_zero() else T.stage(n).zero for n in stages]
    for (n, _, _, S), x in zip(balls, fam):
        if not T.stage(n).member(S, x):
            return EmptinessReport("inconclusive", m_max, tuple(stages), {"stage": n})
    for (n1, x1), (n2, x2) in itertools.pairwise(zip(stages, fam)):
        if T.theta(n2, n1, x2) != x1:
            return EmptinessReport("inconclusive", m_max, tuple(stages), {"stages": (n1, n2)})
    return EmptinessReport(
        "nonempty", m_max, tuple(stages), {f"c_{n}": T.stage(n).fmt(x) for n, x in zip(stages, fam)}
    )


def _project_set(T: Tower, j: int, i: int, S: SumSet) -> SumSet:
    if S.kind == "singleton":
        return Singleton(T.theta(j, i, S.witness))
    if S.kind == "ball":
        H = T.stage(i)
        w = T.theta(j, i, S.witness)
        return H.make_ball(w, min_cut(S.cut, Cut.of(T.rho(i), H.val(w))))
    return S
