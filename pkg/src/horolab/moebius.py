"""Exact PSL(2,R) arithmetic and the action on the upper half plane.

Matrices act by z -> (az+b)/(cz+d).  Everything here is pure and
immutable; group elements are stored as det-1 matrices with a canonical
sign (first nonzero entry of (a, b, c, d) positive), so equality of
PSL(2,R) classes is plain entrywise comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DET_TOL = 1e-12
_ZERO = 1e-14


class NotInCell(ValueError):
    """Raised when a matrix lies outside the open NAU Bruhat cell (d = 0)."""


class ViewerInsideBall(ValueError):
    """Raised when a shadow is requested from a viewpoint inside the ball."""


class DegenerateEndpoints(ValueError):
    """Raised when forward and backward endpoints coincide."""


@dataclass(frozen=True)
class GroupElement:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det <= 0:
            raise ValueError(f"matrix must have positive determinant, got {det}")
        s = 1.0 / math.sqrt(det)
        a, b, c, d = self.a * s, self.b * s, self.c * s, self.d * s
        for entry in (a, b, c, d):
            if abs(entry) > _ZERO:
                if entry < 0:
                    a, b, c, d = -a, -b, -c, -d
                break
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def trace(self) -> float:
        return self.a + self.d

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def close_to(self, other: "GroupElement", tol: float = 1e-10) -> bool:
        return max(abs(x - y) for x, y in zip(self.entries(), other.entries())) <= tol

    def act(self, p):
        """Apply the Moebius action to a PlanePoint or BoundaryPoint."""
        if isinstance(p, PlanePoint):
            z = complex(p.x, p.y)
            w = (self.a * z + self.b) / (self.c * z + self.d)
            return PlanePoint(w.real, w.imag)
        if isinstance(p, BoundaryPoint):
            if p.is_infinity:
                if abs(self.c) <= _ZERO:
                    return INFINITY
                return BoundaryPoint(self.a / self.c)
            denom = self.c * p.value + self.d
            if abs(denom) <= _ZERO:
                return INFINITY
            return BoundaryPoint((self.a * p.value + self.b) / denom)
        raise TypeError(f"cannot act on {type(p).__name__}")

    def act_complex(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def act_real(self, u: float) -> float:
        """Boundary action on a finite real; may return +-inf at the pole."""
        denom = self.c * u + self.d
        if denom == 0.0:
            return math.inf
        return (self.a * u + self.b) / denom


def identity() -> GroupElement:
    return GroupElement(1.0, 0.0, 0.0, 1.0)


def n_x(x: float) -> GroupElement:
    return GroupElement(1.0, x, 0.0, 1.0)


def a_y(y: float) -> GroupElement:
    if y <= 0:
        raise ValueError("a_y needs y > 0")
    s = math.sqrt(y)
    return GroupElement(s, 0.0, 0.0, 1.0 / s)


def k_theta(theta: float) -> GroupElement:
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(c, s, -s, c)


def nstar_u(u: float) -> GroupElement:
    return GroupElement(1.0, 0.0, u, 1.0)


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"point must have Im > 0, got {self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "PlanePoint":
        return PlanePoint(z.real, z.imag)


I_POINT = PlanePoint(0.0, 1.0)


@dataclass(frozen=True)
class BoundaryPoint:
    value: float = math.nan
    is_infinity: bool = False

    def __post_init__(self):
        if not self.is_infinity and not math.isfinite(self.value):
            object.__setattr__(self, "is_infinity", True)
            object.__setattr__(self, "value", math.nan)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.value == other.value

    def __hash__(self):
        return hash("inf") if self.is_infinity else hash(self.value)

    def __repr__(self):
        return "BoundaryPoint(oo)" if self.is_infinity else f"BoundaryPoint({self.value})"


INFINITY = BoundaryPoint(is_infinity=True)


def hyp_dist(z: PlanePoint, w: PlanePoint) -> float:
    q = 1.0 + (abs(z.z - w.z) ** 2) / (2.0 * z.y * w.y)
    return math.acosh(max(q, 1.0))


def dist_to_geodesic(p: PlanePoint, a: BoundaryPoint, b: BoundaryPoint) -> float:
    """Distance from p to the complete geodesic with endpoints a, b."""
    if a == b:
        raise DegenerateEndpoints("geodesic endpoints coincide")
    if a.is_infinity or b.is_infinity:
        u = b.value if a.is_infinity else a.value
        # vertical line Re = u: sinh(dist) = |x - u| / y
        return math.asinh(abs(p.x - u) / p.y)
    q = abs(p.z - a.value) * abs(p.z - b.value) / (abs(b.value - a.value) * p.y)
    return math.acosh(max(q, 1.0))


def busemann_base(u: BoundaryPoint, p: PlanePoint) -> float:
    """The cocycle against the base point i: beta_u(p, i)."""
    if u.is_infinity:
        return -math.log(p.y)
    return math.log(abs(p.z - u.value) ** 2 / ((1.0 + u.value**2) * p.y))


def busemann(u: BoundaryPoint, w: PlanePoint, z: PlanePoint) -> float:
    """Signed horospherical distance beta_u(w, z), via the closed form."""
    if u.is_infinity:
        return math.log(z.y / w.y)
    return busemann_base(u, w) - busemann_base(u, z)


def iwasawa(g: GroupElement, order: str = "NAK"):
    """Decompose g as n_x a_y k_theta (NAK) or k_theta a_y n_x (KAN).

    Returns (x, y, theta) with theta in [0, pi).
    """
    if order == "KAN":
        x, y, theta = iwasawa(g.inverse(), "NAK")
        return -x, 1.0 / y, (-theta) % math.pi
    if order != "NAK":
        raise ValueError(f"unknown order {order!r}")
    z = g.act_complex(1j)
    x, y = z.real, z.imag
    k = a_y(y).inverse() * (n_x(x).inverse() * g)
    theta = math.atan2(-k.c, k.a) % math.pi
    return x, y, theta


def recompose(x: float, y: float, theta: float, order: str = "NAK") -> GroupElement:
    if order == "NAK":
        return n_x(x) * a_y(y) * k_theta(theta)
    if order == "KAN":
        return k_theta(theta) * a_y(y) * n_x(x)
    raise ValueError(f"unknown order {order!r}")


def bruhat_nau(g: GroupElement):
    """Write g = n_x a_y nstar_u; raises NotInCell off the open cell (d = 0)."""
    a, b, c, d = g.entries()
    if abs(d) <= 1e-13:
        raise NotInCell("matrix has d = 0, not in the open NAU cell")
    if d < 0:
        a, b, c, d = -a, -b, -c, -d
    return b / d, 1.0 / (d * d), c / d


def visual_points(g: GroupElement):
    """Forward and backward endpoints of the frame g: (g.oo, g.0)."""
    plus = INFINITY if abs(g.c) <= _ZERO else BoundaryPoint(g.a / g.c)
    minus = INFINITY if abs(g.d) <= _ZERO else BoundaryPoint(g.b / g.d)
    return plus, minus


@dataclass(frozen=True)
class HopfCoordinates:
    u_plus: BoundaryPoint
    u_minus: BoundaryPoint
    s: float

    def __post_init__(self):
        if self.u_plus == self.u_minus:
            raise DegenerateEndpoints("u_plus == u_minus")


def _frame_with_endpoints(plus: BoundaryPoint, minus: BoundaryPoint) -> GroupElement:
    """Some g with g.oo = plus, g.0 = minus."""
    if plus.is_infinity:
        return n_x(minus.value)
    if minus.is_infinity:
        return GroupElement(plus.value, -1.0, 1.0, 0.0)
    det = plus.value - minus.value
    if det > 0:
        return GroupElement(plus.value, minus.value, 1.0, 1.0)
    return GroupElement(plus.value, -minus.value, 1.0, -1.0)


def hopf(g: GroupElement) -> HopfCoordinates:
    plus, minus = visual_points(g)
    if plus == minus:
        raise DegenerateEndpoints("frame has coinciding endpoints")
    s = -busemann_base(plus, g.act(I_POINT))
    return HopfCoordinates(plus, minus, s)


def hopf_inverse(h: HopfCoordinates) -> GroupElement:
    base = _frame_with_endpoints(h.u_plus, h.u_minus)
    s0 = -busemann_base(h.u_plus, base.act(I_POINT))
    return base * a_y(math.exp(h.s - s0))


@dataclass(frozen=True)
class BoundaryArc:
    """Finite union of closed intervals on R, optionally including oo.

    Interval endpoints may be +-inf to encode rays.
    """

    intervals: tuple = field(default_factory=tuple)
    contains_infinity: bool = False

    def __post_init__(self):
        ivs = sorted(tuple(i) for i in self.intervals)
        for (lo, hi) in ivs:
            if lo > hi:
                raise ValueError(f"bad interval [{lo}, {hi}]")
        for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
            if lo <= hi:
                raise ValueError("intervals must be disjoint and sorted")
        object.__setattr__(self, "intervals", tuple(ivs))

    def contains(self, u: BoundaryPoint) -> bool:
        if u.is_infinity:
            return self.contains_infinity
        return any(lo <= u.value <= hi for lo, hi in self.intervals)

    def contains_arc(self, other: "BoundaryArc", tol: float = 1e-9) -> bool:
        if other.contains_infinity and not self.contains_infinity:
            return False
        for lo, hi in other.intervals:
            if not any(a - tol <= lo and hi <= b + tol for a, b in self.intervals):
                return False
        return True


def _forward_endpoint(w: PlanePoint) -> BoundaryPoint:
    """Endpoint of the geodesic ray from i through w (w != i)."""
    x, y = w.x, w.y
    if abs(x) <= _ZERO:
        return INFINITY if y > 1.0 else BoundaryPoint(0.0)
    c = (x * x + y * y - 1.0) / (2.0 * x)
    rho = math.sqrt(c * c + 1.0)
    return BoundaryPoint(c + rho if x > 0 else c - rho)


def _axis_shadow_threshold(h: float, r: float) -> float:
    """Shadow of B_r(i h), h = e^s > 1, seen from i, is {|x| >= X} u {oo}.

    Solves the tangency condition cosh(dist(ih, geodesic(X, -1/X))) = cosh r
    for X; the condition is a reciprocal quadratic in X^2.
    """
    C = math.cosh(r) ** 2 * h * h
    denom = h * h - C  # < 0 always
    B = (1.0 + h**4 - 2.0 * C) / denom
    disc = B * B - 4.0
    if disc < 0 or B >= -2.0:
        raise ViewerInsideBall("no tangency: viewer inside or on the ball")
    q = (-B + math.sqrt(disc)) / 2.0
    return math.sqrt(q)


def shadow_interval(z: PlanePoint, w: PlanePoint, r: float) -> BoundaryArc:
    """Shadow of the ball B_r(w) on the boundary, seen from z."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if hyp_dist(z, w) <= r:
        raise ViewerInsideBall("viewpoint inside the closed ball")
    # move z to i, then rotate w onto the upper imaginary axis
    move = a_y(1.0 / z.y) * n_x(-z.x)
    w1 = move.act(w)
    xi = _forward_endpoint(w1)
    if xi.is_infinity:
        rot = identity()
    else:
        rot = k_theta(math.atan2(1.0, xi.value))
    conj = rot * move
    w2 = conj.act(w)
    X = _axis_shadow_threshold(w2.y, r)
    back = conj.inverse()
    e1 = back.act(BoundaryPoint(X))
    e2 = back.act(BoundaryPoint(-X))
    # the source arc is {|x| >= X} u {oo}; oo lies in the image arc iff
    # conj(oo) lies in the source arc
    src_inf = conj.act(INFINITY)
    contains_inf = src_inf.is_infinity or abs(src_inf.value) >= X
    if e1.is_infinity or e2.is_infinity:
        fin = e2 if e1.is_infinity else e1
        sample = back.act(BoundaryPoint(2.0 * X))
        if sample.is_infinity:
            sample = back.act(BoundaryPoint(-2.0 * X))
        if sample.value >= fin.value:
            return BoundaryArc(((fin.value, math.inf),), True)
        return BoundaryArc(((-math.inf, fin.value),), True)
    lo, hi = sorted((e1.value, e2.value))
    if contains_inf:
        return BoundaryArc(((-math.inf, lo), (hi, math.inf)), True)
    return BoundaryArc(((lo, hi),))
