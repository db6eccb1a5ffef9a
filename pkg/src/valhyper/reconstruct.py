"""From a tower to a valued field: inverse limit, sequence structure over
Gamma/Delta, Hahn field, and pointwise checks that the new field has the
tower's quotients as its valued hyperfields.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import HypothesisMismatch, Undetermined, ValHyperError
from .groundfield import QQ, SeriesField
from .hahn import HahnField, HahnSeries, check_rv_round_trip, hs_val, rv_project
from .hyperfield import Report, Sampled, Scope, _Acc
from .ogroup import (
    INF,
    ConvexSubgroup,
    Cut,
    GroupElem,
    Segment,
    lift_from_quotient,
    quotient_map,
    unit,
    zero as gzero,
)
from .rvsort import SplitSequence, from_stringent
from .tower import LimitView, Tower, builtin_tower, limit_hyperfield

DEFECTS = ("skip-w",)


@dataclass
class ReconstructionResult:
    tower: Tower
    limit: LimitView
    delta: ConvexSubgroup
    sort: SplitSequence
    field: HahnField
    budget: int
    seed: int = 0
    defect: str | None = None
    reports: list = field(default_factory=list)

    # -- the composite valuation v(A) = v_L(rv(A))
    def rv(self, A: HahnSeries):
        """rv(A) as an element of the limit hyperfield."""
        return self.sort.unsplit(rv_project(A))

    def val(self, A: HahnSeries):
        if A.is_exact_zero():
            return INF
        if self.defect == "skip-w":
            # planted: only the Gamma/Delta part survives
            return lift_from_quotient(hs_val(A), self.delta)
        return self.limit.val(self.rv(A))

    def qval(self, A: HahnSeries):
        """w'(rv(A)) in Gamma/Delta."""
        return self.sort.wval(self.rv(A)) if not A.is_exact_zero() else INF

    def stage(self, A: HahnSeries, i: int):
        """Phi_i(A): the stage-i image of rv(A)."""
        return self.limit.stage_elem(self.rv(A), i)

    def lift(self, x) -> HahnSeries:
        """A series whose rv is the limit element x."""
        return self.field.monomial(self.sort.split(x))

    def lift_stage(self, z, i: int) -> HahnSeries:
        H = self.tower.stage(i)
        L = self.limit
        return self.lift(L.zero if H.is_zero(z) else L.from_ground(H.rep(z)))

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports)

    def pipeline(self) -> list:
        T = self.tower
        return [
            {"step": "tower", "name": T.name, "union": str(T.union), **T.descriptor},
            {"step": "limit", "budget": self.budget, "field_mode": self.limit.field_mode},
            {"step": "sequence structure", "value group": f"Z^{self.sort.n}", "delta": str(self.delta)},
            {"step": "hahn field", "name": self.field.name},
            {"step": "valuation", "rule": "v(A) = v_lim(rv(A))" + (" [defect: skip-w]" if self.defect else "")},
        ]

    def to_json(self) -> dict:
        return {
            "pipeline": self.pipeline(),
            "reports": [r.to_json() for r in self.reports],
            "seed": self.seed,
            "budget": self.budget,
        }


def default_delta(T: Tower) -> ConvexSubgroup:
    """The convex subgroup whose positive part is the union of the tower."""
    U = T.union
    if U is None or U.kind == "upto":
        raise HypothesisMismatch(f"the segments of {T.name} have union {U}, not the positive part of a convex subgroup")
    return ConvexSubgroup(0 if U.kind == "zero" else U.k, U.n)


def reconstruct(
    T: Tower,
    delta: ConvexSubgroup | None = None,
    budget: int = 3,
    samples: int = 100,
    seed: int = 0,
    defect: str | None = None,
) -> ReconstructionResult:
    if defect is not None and defect not in DEFECTS:
        raise ValueError(f"unknown defect {defect!r}")
    L = limit_hyperfield(T, budget=budget, witness=True)
    if delta is None:
        delta = default_delta(T)
    if T.union != delta.positive_part:
        raise HypothesisMismatch(f"union of the segments is {T.union}, but Delta_>=0 is {delta.positive_part}")
    S = from_stringent(L, scope=Sampled(50, seed), delta=delta)
    K = HahnField(S, name=f"Hahn[{T.name}/{delta}]")
    R = ReconstructionResult(T, L, delta, S, K, budget, seed, defect)
    R.reports = check_valuation_axioms(R, Sampled(samples, seed))
    R.reports += check_rv_round_trip(S, Sampled(samples, seed))
    return R


# ---------------------------------------------------------------- sampling


def _values(R: ReconstructionResult, i: int) -> list:
    """Values around the boundary of rho_i, plus a jump past Delta when there is one."""
    T = R.tower
    n = T.K.n
    out = set()
    for j in range(i + 3):
        s = T.rho(j).sup
        if s is not None:
            out.add(s)
            out.add(s + unit(n, n - 1))
    q = R.delta.quotient_rank
    if q:
        out.add(unit(n, q - 1))
    return sorted(out)


def _unit_like(R: ReconstructionResult, g, rng) -> HahnSeries:
    """A monomial of composite value g (a random nonzero coefficient)."""
    L = R.limit
    c = L.K.base.random(rng, nonzero=True)
    return R.lift(L.monomial(g, c))


def _small(R: ReconstructionResult, rng, i: int) -> HahnSeries:
    return _unit_like(R, rng.choice(_values(R, i)), rng)


def sample_elem(R: ReconstructionResult, rng) -> HahnSeries:
    return R.field.sample(rng)


def sample_pair(R: ReconstructionResult, rng, i: int = 0):
    A = sample_elem(R, rng)
    r = rng.random()
    if r < 0.35:
        return A, sample_elem(R, rng)
    if r < 0.5:
        return A, -A
    # -A plus something small relative to A
    B = -A + A * _small(R, rng, i)
    return A, B


# ------------------------------------------------------------ valuation


def check_valuation_axioms(R: ReconstructionResult, scope: Scope = Sampled(100)) -> list[Report]:
    """v(AB) = v(A)+v(B), v(A+B) >= min with equality off the cancelling case,
    and the compatibility w'(rv(A)) = v'(A)."""
    names = ["v multiplicative", "v ultrametric", "w'(rv) = v'"]
    acc = _Acc(names, scope.seed)
    rng = random.Random(scope.seed)
    cases = {"rv(a) != -rv(b)": 0, "rv(a) = -rv(b)": 0}
    for _ in range(scope.n):
        A, B = sample_pair(R, rng)
        vA, vB = R.val(A), R.val(B)
        acc.check("v multiplicative", R.val(A * B) == vA + vB, lambda: {"A": repr(A), "B": repr(B)})
        C = A + B
        vC = R.val(C)
        m = min(vA, vB)
        ok = vC >= m
        if rv_project(A) == R.sort.neg(rv_project(B)):
            cases["rv(a) = -rv(b)"] += 1
            ok = ok and (vC is INF or vC[: R.delta.quotient_rank] > m[: R.delta.quotient_rank] or R.delta.quotient_rank == 0)
        else:
            cases["rv(a) != -rv(b)"] += 1
            if vA != vB:
                ok = ok and vC == m
        acc.check("v ultrametric", ok, lambda: {"A": repr(A), "B": repr(B), "v(A+B)": repr(vC)})
        for X in (A, B, C):
            if not X.is_exact_zero():
                acc.check(
                    "w'(rv) = v'",
                    quotient_map(R.val(X), R.delta) == hs_val(X),
                    lambda: {"A": repr(X), "v(A)": repr(R.val(X)), "v'(A)": repr(hs_val(X))},
                )
    out = acc.out()
    out[1].note = ", ".join(f"{k}: {v}" for k, v in cases.items())
    return out


# ------------------------------------------------------------ the theorem


def verify_theorem(R: ReconstructionResult, stages=range(4), samples: int = 100, seed: int | None = None) -> list[Report]:
    """For each stage i, Phi_i: H_{rho_i}(K_new) -> H_{rho_i}(K0) is checked to be
    well defined and injective, surjective, multiplicative, value preserving,
    and to carry sums onto sums in both directions."""
    seed = R.seed if seed is None else seed
    out = []
    for i in stages:
        H = R.tower.stage(i)
        rho = R.tower.rho(i)
        names = [f"[{i}] injective", f"[{i}] surjective", f"[{i}] multiplicative", f"[{i}] value", f"[{i}] sum ->", f"[{i}] sum <-"]
        acc = _Acc(names, seed)
        rng = random.Random(seed * 1000 + i)
        for _ in range(samples):
            A, B = sample_pair(R, rng, i)
            if A.is_exact_zero():
                continue
            pA, pB = R.stage(A, i), R.stage(B, i)
            vA = R.val(A)
            # value
            acc.check(names[3], H.val(pA) == vA, lambda: {"A": repr(A), "v(A)": repr(vA), "v(Phi A)": repr(H.val(pA))})
            # [A] = [A'] iff v(A - A') > rho_i + v(A)
            A2 = A + A * _small(R, rng, i)
            same = R.stage(A2, i) == pA
            D = A - A2
            close = D.is_exact_zero() or Cut.of(rho, vA).exceeded_by(R.val(D))
            acc.check(names[0], same == close, lambda: {"A": repr(A), "A'": repr(A2)})
            # multiplicative
            acc.check(names[2], R.stage(A * B, i) == H.mul(pA, pB), lambda: {"A": repr(A), "B": repr(B)})
            # sums, forward: Phi(A+B) in Phi(A) + Phi(B)
            S = H.add(pA, pB)
            C = A + B
            acc.check(names[4], H.member(S, R.stage(C, i)), lambda: {"A": repr(A), "B": repr(B), "sum": H.fmt_set(S)})
            # sums, backward: z in Phi(A) + Phi(B) has a preimage in [A] + [B]
            for _ in range(2):
                z = H.sample_member(S, rng)
                Z = R.lift_stage(z, i)
                acc.check(names[1], R.stage(Z, i) == z, lambda: {"z": H.fmt(z)})
                vB = R.val(B)
                W = Z - A - B
                m = vA if B.is_exact_zero() else min(vA, vB)
                inside = W.is_exact_zero() or Cut.of(rho, m).exceeded_by(R.val(W))
                acc.check(names[5], inside, lambda: {"A": repr(A), "B": repr(B), "z": H.fmt(z)})
        out += acc.out()
    return out


# --------------------------------------------- the explicit example map


@dataclass(frozen=True)
class ModelElem:
    """y^m x^k sum_i a(i) x^i with a(0) != 0, an element of H_Delta(Q((x))((y)))."""

    m: int
    k: int
    a: object  # i -> Fraction, memoized below

    def coeffs(self, N: int) -> list:
        return [self.a(i) for i in range(N)]


def _memo(fn):
    cache = {}

    def g(i):
        if i not in cache:
            cache[i] = Fraction(fn(i))
        return cache[i]

    return g


class ExampleModel:
    """H_Delta of Q((x))((y)) with Delta = {0} x Z, coefficients read lazily
    up to ``horizon`` when a cancellation has to be detected."""

    def __init__(self, horizon: int = 64):
        self.horizon = horizon

    def mul(self, p: ModelElem | None, q: ModelElem | None):
        if p is None or q is None:
            return None
        return ModelElem(p.m + q.m, p.k + q.k, _memo(lambda i: sum(p.a(j) * q.a(i - j) for j in range(i + 1))))

    def add(self, p: ModelElem | None, q: ModelElem | None):
        """('one', elem) or ('zeroball', m): everything of y-order > m, and 0."""
        if p is None:
            return ("one", q)
        if q is None:
            return ("one", p)
        if p.m != q.m:
            return ("one", p if p.m < q.m else q)
        k = min(p.k, q.k)
        dp, dq = p.k - k, q.k - k

        def s(i):
            x = p.a(i - dp) if i >= dp else Fraction(0)
            y = q.a(i - dq) if i >= dq else Fraction(0)
            return x + y

        s = _memo(s)
        for i0 in range(self.horizon + 1):
            if s(i0):
                return ("one", ModelElem(p.m, k + i0, _memo(lambda i: s(i + i0))))
        return ("zeroball", p.m)

    @staticmethod
    def val(p: ModelElem | None):
        return INF if p is None else GroupElem((p.m, p.k))


def psi(L: LimitView, x, n: int):
    """The example map on stage n: y^m x^k sum_{i<=n} a_i x^i -> (m, k, [a_i])."""
    if L.is_zero(x):
        return None
    rep = L.T.stage(n).rep(x.payload.at(n))
    (m, k), _ = rep.terms[0]
    a = [Fraction(0)] * (n + 1)
    for e, c in rep.terms:
        assert e[0] == m
        a[e[1] - k] = Fraction(c)
    return (m, k, tuple(a))


def _model_window(p: ModelElem | None, n: int):
    return None if p is None else (p.m, p.k, tuple(p.coeffs(n + 1)))


_COEFF_FAMILIES = [
    ("const", lambda c: (lambda i: c)),
    ("geom", lambda c: (lambda i: c ** i)),
    ("poly", lambda c: (lambda i: c + i * i)),
    ("alt", lambda c: (lambda i: c * (-1) ** i / (i + 1))),
]


def _model_sample(rng, ex_rng=None):
    m, k = rng.randint(-2, 2), rng.randint(-2, 2)
    name, fam = rng.choice(_COEFF_FAMILIES)
    c = Fraction(rng.choice([1, -1, 2, -2, 3]), rng.choice([1, 2, 3]))
    fn = fam(c)
    return m, k, fn, f"{name}({c})"


def paper_example_iso(n_max: int = 4, samples: int = 100, seed: int = 0, max_stage: int = 64) -> list[Report]:
    """The map lim H_{(0,n)}(Q(x)(y)) -> H_Delta(Q((x))((y))) read on stage n_max
    windows: multiplicative, carries sums to sums (zero balls matched against
    cancellation in the model), value preserving and injective."""
    T = builtin_tower("paper-0n")
    L = LimitView(T, budget=n_max, max_stage=max_stage)
    M = ExampleModel(horizon=max_stage)
    names = ["multiplicative", "additive", "isometric", "injective"]
    acc = _Acc(names, seed)
    rng = random.Random(seed)

    def make(m, k, fn, label):
        return L.from_coeffs((m, k), fn, label=label), ModelElem(m, k, _memo(fn))

    for _ in range(samples):
        m, k, fn, lab = _model_sample(rng)
        x, p = make(m, k, fn, lab)
        r = rng.random()
        if r < 0.4:
            y, q = make(*_model_sample(rng))
        elif r < 0.6:
            # the negative: a zero ball that only the search bound can report
            y, q = make(m, k, lambda i, fn=fn: -fn(i), "-" + lab)
        else:
            # agrees with -x on the first j coefficients
            j = rng.randint(1, n_max + 1)
            g = lambda i, fn=fn, j=j: -fn(i) if i < j else -fn(i) + 1  # noqa: E731
            y, q = make(m, k, g, f"-{lab}+x^{j}")
        px = psi(L, x, n_max)
        acc.check("isometric", L.val(x) == M.val(p) and px == _model_window(p, n_max), lambda: {"x": L.fmt(x)})
        acc.check("multiplicative", psi(L, L.mul(x, y), n_max) == _model_window(M.mul(p, q), n_max), lambda: {"x": L.fmt(x), "y": L.fmt(y)})
        kind, w = M.add(p, q)
        try:
            S = L.add(x, y)
        except Undetermined:
            S = None
        if kind == "zeroball":
            ok = S is None or (S.kind == "zeroball" and S.cut == Cut.of(T.union, M.val(p)))
        else:
            ok = S is not None and S.kind == "singleton" and psi(L, S.witness, n_max) == _model_window(w, n_max)
        acc.check("additive", ok, lambda: {"x": L.fmt(x), "y": L.fmt(y), "model": kind})
        same_l = x == y
        same_m = px == psi(L, y, n_max)
        acc.check("injective", same_l == same_m, lambda: {"x": L.fmt(x), "y": L.fmt(y)})
    return acc.out()
