"""Lexicographically ordered groups Z^n, initial segments of the nonnegative
cone, convex subgroups and cuts.

Group elements subclass ``tuple`` so that Python's native tuple ordering is
the lexicographic order with the first coordinate most significant.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Iterable


class _Infinity:
    """The symbol added on top of every value group."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    is_inf = True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("inf")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf")
        return self

    def __repr__(self):
        return "inf"

    __str__ = __repr__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class GroupElem(tuple):
    __slots__ = ()
    is_inf = False

    def __new__(cls, coords: Iterable[int] = ()):
        return tuple.__new__(cls, coords)

    @property
    def n(self) -> int:
        return len(self)

    # comparisons with INF fall through to _Infinity's reflected methods
    __hash__ = tuple.__hash__

    def __add__(self, other):
        if other is INF:
            return INF
        return tuple.__new__(GroupElem, map(operator.add, self, other))

    def __sub__(self, other):
        if other is INF:
            raise ArithmeticError("finite - inf")
        return tuple.__new__(GroupElem, map(operator.sub, self, other))

    def __neg__(self):
        return tuple.__new__(GroupElem, map(operator.neg, self))

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return GroupElem([k * a for a in self])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self)

    def __repr__(self):
        if len(self) == 1:
            return str(self[0])
        return "(" + ",".join(str(c) for c in self) + ")"

    __str__ = __repr__


def G(*coords: int) -> GroupElem:
    return GroupElem(coords)


def zero(n: int) -> GroupElem:
    return GroupElem((0,) * n)


def unit(n: int, i: int) -> GroupElem:
    """Basis vector e_i (0-based)."""
    return GroupElem(1 if j == i else 0 for j in range(n))


def last_unit(n: int) -> GroupElem:
    return unit(n, n - 1)


def leading_index(g: GroupElem) -> int | None:
    for i, c in enumerate(g):
        if c:
            return i
    return None


_ELEM_RE = re.compile(r"^\(?\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*\)?$")


def parse_elem(text: str, n: int | None = None) -> GroupElem:
    t = text.strip().replace("−", "-")
    if t in ("inf", "∞"):
        return INF  # type: ignore[return-value]
    m = _ELEM_RE.match(t)
    if not m:
        raise ValueError(f"not a group element: {text!r}")
    body = m.group(1)
    coords = [] if body is None else [int(c) for c in body.split(",")]
    if n is not None and len(coords) != n:
        raise ValueError(f"expected {n} coordinates in {text!r}")
    return GroupElem(coords)


@dataclass(frozen=True)
class Segment:
    """A nonempty initial segment of Gamma_{>=0}: Zero, UpTo(g) or Cone(k).

    Constructors normalize so that equal sets compare equal:
    UpTo(0) and Cone(0) both become Zero.
    """

    kind: str
    n: int
    g: GroupElem | None = None
    k: int = 0

    @staticmethod
    def zero(n: int) -> "Segment":
        return Segment("zero", n)

    @staticmethod
    def upto(g: GroupElem) -> "Segment":
        g = GroupElem(g)
        if g < zero(len(g)):
            raise ValueError("UpTo needs g >= 0")
        if g.is_zero():
            return Segment.zero(len(g))
        return Segment("upto", len(g), g)

    @staticmethod
    def cone(k: int, n: int) -> "Segment":
        if not 0 <= k <= n:
            raise ValueError("cone index out of range")
        if k == 0:
            return Segment.zero(n)
        return Segment("cone", n, None, k)

    @property
    def sup(self) -> GroupElem | None:
        """Largest element, or None when the segment is unbounded."""
        if self.kind == "zero":
            return zero(self.n)
        if self.kind == "upto":
            return self.g
        return None

    def __str__(self):
        if self.kind == "zero":
            return "{0}"
        if self.kind == "upto":
            return f"[0,{self.g!r}]"
        return f"cone({self.k})"

    __repr__ = __str__


def parse_segment(text: str, n: int) -> Segment:
    t = text.strip().replace(" ", "")
    if t in ("{0}", "0"):
        return Segment.zero(n)
    m = re.match(r"^cone\((\d+)\)$", t)
    if m:
        return Segment.cone(int(m.group(1)), n)
    m = re.match(r"^\[0,(.*)\]$", t)
    if m:
        return Segment.upto(parse_elem(m.group(1), n))
    # bare group element means UpTo(g)
    return Segment.upto(parse_elem(t, n))


def seg_contains(rho: Segment, gamma: GroupElem) -> bool:
    if gamma is INF or gamma < zero(rho.n):
        return False
    if rho.kind == "zero":
        return gamma.is_zero()
    if rho.kind == "upto":
        return gamma <= rho.g
    return not any(gamma[: rho.n - rho.k])


def gt_segment(gamma, rho: Segment, base) -> bool:
    """True iff gamma > r + base for every r in rho."""
    if base is INF:
        return gamma is INF
    if gamma is INF:
        return True
    d = gamma - base
    if rho.kind == "zero":
        return d > zero(rho.n)
    if rho.kind == "upto":
        return d > rho.g
    m = rho.n - rho.k
    return tuple(d[:m]) > (0,) * m


def seg_leq(r1: Segment, r2: Segment) -> bool:
    """Inclusion r1 subset of r2."""
    if r1.kind == "zero":
        return True
    if r1.kind == "upto":
        return seg_contains(r2, r1.g)
    if r2.kind == "cone":
        return r1.k <= r2.k
    if r2.kind == "upto" and r1.k < r1.n:
        m = r1.n - r1.k
        return tuple(r2.g[:m]) > (0,) * m
    return False


def seg_double_leq(r1: Segment, r2: Segment) -> bool:
    """True iff {2g : g in r1} is contained in r2."""
    if r1.kind == "zero":
        return True
    if r1.kind == "upto":
        return seg_contains(r2, 2 * r1.g)
    # 2*Cone(k) = Cone(k)
    return seg_leq(r1, r2)


def seg_shift_leq(r1: Segment, shift: GroupElem, r2: Segment) -> bool:
    """True iff r + shift lies in r2 for every r in r1 (shift >= 0)."""
    if r1.kind != "cone":
        return seg_contains(r2, r1.sup + shift)
    if r2.kind == "cone":
        return r1.k <= r2.k and seg_contains(r2, shift)
    if r2.kind == "upto":
        m = r1.n - r1.k
        return m > 0 and tuple(r2.g[:m]) > tuple(shift[:m])
    return False


@dataclass(frozen=True)
class ConvexSubgroup:
    """{0}^(n-k) x Z^k."""

    k: int
    n: int

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError("convex subgroup index out of range")

    def contains(self, gamma: GroupElem) -> bool:
        return gamma is not INF and not any(gamma[: self.n - self.k])

    @property
    def positive_part(self) -> Segment:
        return Segment.cone(self.k, self.n)

    @property
    def quotient_rank(self) -> int:
        return self.n - self.k

    def __str__(self):
        return f"Delta(k={self.k},n={self.n})"


def quotient_map(gamma, delta: ConvexSubgroup):
    if gamma is INF:
        return INF
    return GroupElem(gamma[: delta.n - delta.k])


def lift_from_quotient(g: GroupElem, delta: ConvexSubgroup) -> GroupElem:
    """Coset representative with trailing coordinates zero."""
    return GroupElem(tuple(g) + (0,) * delta.k)


class Cut:
    """The upper set {gamma : gamma > rho + base}, stored in normal form.

    ``k == 0`` means a point cut {gamma > c}; ``k > 0`` means the cut only
    depends on the first n-k coordinates of ``c`` (the rest are zeroed).
    A cut with ``c = INF`` is exceeded only by INF.
    """

    __slots__ = ("c", "k", "n")

    def __init__(self, c, k: int, n: int):
        self.c = c
        self.k = k
        self.n = n

    def __eq__(self, other):
        return isinstance(other, Cut) and self.k == other.k and self.n == other.n and self.c == other.c

    def __hash__(self):
        return hash((self.c, self.k, self.n))

    @staticmethod
    def of(rho: Segment, base) -> "Cut":
        if base is INF:
            return Cut(INF, 0, rho.n)
        kind = rho.kind
        if kind == "zero":
            return Cut(base, 0, rho.n)
        if kind == "upto":
            return Cut(base + rho.g, 0, rho.n)
        m = rho.n - rho.k
        return Cut(GroupElem(tuple(base[:m]) + (0,) * rho.k), rho.k, rho.n)

    def exceeded_by(self, gamma) -> bool:
        if gamma is INF:
            return True
        if self.c is INF:
            return False
        if self.k == 0:
            return gamma > self.c
        m = self.n - self.k
        return tuple(gamma[:m]) > tuple(self.c[:m])

    def leq(self, other: "Cut") -> bool:
        """self <= other as cuts: everything above other is above self."""
        if other.c is INF:
            return True
        if self.c is INF:
            return False
        ma, mb = self.n - self.k, other.n - other.k
        if self.k == other.k == 0:
            return self.c <= other.c
        p = min(ma, mb)
        a, b = tuple(self.c[:p]), tuple(other.c[:p])
        if a != b:
            return a < b
        # equal heads: the finer cut (more live coordinates) is the larger set
        return ma >= mb

    def is_point(self) -> bool:
        return self.k == 0 and self.c is not INF

    def __str__(self):
        if self.c is INF:
            return "inf"
        if self.k == 0:
            return repr(self.c)
        m = self.n - self.k
        head = ",".join(str(x) for x in self.c[:m])
        return f"({head},*)" if m else "(*)"

    __repr__ = __str__


def min_cut(a: Cut, b: Cut) -> Cut:
    return a if a.leq(b) else b
