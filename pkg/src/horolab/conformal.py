"""Atomic approximations of the conformal density of the limit set, its
basepoint/scaling laws, and the induced measures on horocycle orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .fuchsian import FuchsianGroup
from .moebius import (
    INFINITY,
    BoundaryArc,
    BoundaryPoint,
    GroupElement,
    PlanePoint,
    identity,
    k_theta,
)


def lebesgue_density(u: float) -> float:
    """Density of the visual measure at basepoint i: 1/(1+u^2)."""
    return 1.0 / (1.0 + u * u)


def _busemann_to_base(u, z: complex):
    """Vectorized Busemann cocycle beta_u(z, i) for finite boundary u."""
    u = np.asarray(u, dtype=np.float64)
    return (
        np.log((z.real - u) ** 2 + z.imag**2)
        - np.log(1.0 + u * u)
        - math.log(z.imag)
    )


@dataclass(frozen=True)
class AtomicBoundaryMeasure:
    """Finite atomic measure on the boundary approximating a conformal
    density of dimension delta; atoms sit at limit-set cylinder points."""

    points: np.ndarray  # finite atom positions
    weights: np.ndarray  # positive weights
    inf_weight: float  # aggregated weight of atoms at oo
    basepoint: PlanePoint
    delta: float
    depth: int
    group: FuchsianGroup = field(repr=False)

    def __post_init__(self):
        if np.any(self.weights <= 0) or self.inf_weight < 0:
            raise ValueError("weights must be positive")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum() + self.inf_weight)

    def atoms(self):
        for p, w in zip(self.points, self.weights):
            yield BoundaryPoint(float(p)), float(w)
        if self.inf_weight > 0:
            yield INFINITY, self.inf_weight

    def arc_mass(self, arc: BoundaryArc) -> float:
        mask = np.zeros(len(self.points), dtype=bool)
        for lo, hi in arc.intervals:
            mask |= (self.points >= lo) & (self.points <= hi)
        m = float(self.weights[mask].sum())
        if arc.contains_infinity:
            m += self.inf_weight
        return m


def ps_density(
    group: FuchsianGroup,
    depth: int,
    s_offset: float = 0.0,
    delta: float | None = None,
    delta_depth: int = 8,
) -> AtomicBoundaryMeasure:
    """Cylinder-point atoms weighted by e^{-(delta+s_offset) d(w.i, i)},
    normalized to mass 1 at basepoint i."""
    if depth < 2:
        raise ValueError("depth must be >= 2")
    if delta is None:
        delta = group.delta(delta_depth)
    pts, finite, disps, _ = group.limit_samples(depth)
    w = np.exp(-(delta + s_offset) * disps)
    inf_w = float(w[~finite].sum())
    pts, w = pts[finite], w[finite]
    total = w.sum() + inf_w
    return AtomicBoundaryMeasure(
        pts, w / total, inf_w / total, PlanePoint(0.0, 1.0), delta, depth, group
    )


def rn_reweight(nu: AtomicBoundaryMeasure, z: PlanePoint) -> AtomicBoundaryMeasure:
    """Move the basepoint from i to z: weights pick up e^{-delta beta_u(z, i)}."""
    if abs(nu.basepoint.z - 1j) > 1e-14:
        raise ValueError("measure must be based at i")
    factors = np.exp(-nu.delta * _busemann_to_base(nu.points, z.z))
    inf_factor = math.exp(-nu.delta * (-math.log(z.y)))  # beta_oo(z, i) = -log Im z
    return AtomicBoundaryMeasure(
        nu.points,
        nu.weights * factors,
        nu.inf_weight * inf_factor,
        z,
        nu.delta,
        nu.depth,
        nu.group,
    )


def pushforward(nu: AtomicBoundaryMeasure, g: GroupElement) -> AtomicBoundaryMeasure:
    """g_* nu: atoms moved by g, weights kept."""
    c, d, a = g.c, g.d, g.a
    den = c * nu.points + d
    with np.errstate(divide="ignore", invalid="ignore"):
        pts = (a * nu.points + g.b) / den
    blown = np.abs(den) < 1e-13
    inf_w = float(nu.weights[blown].sum())
    if nu.inf_weight > 0:
        img = g.act(INFINITY)
        if img.is_infinity:
            inf_w += nu.inf_weight
        else:
            pts = np.append(pts[~blown], img.value)
            w = np.append(nu.weights[~blown], nu.inf_weight)
            return AtomicBoundaryMeasure(
                pts, w, inf_w, nu.basepoint, nu.delta, nu.depth, nu.group
            )
    return AtomicBoundaryMeasure(
        pts[~blown], nu.weights[~blown], inf_w, nu.basepoint, nu.delta, nu.depth, nu.group
    )


def scaling_P(group: FuchsianGroup, w: PlanePoint, depth: int, delta: float | None = None) -> float:
    """Ratio of un-normalized orbit sums: sum e^{-delta d(i, g.w)} over
    sum e^{-delta d(i, g.i)}, words up to `depth`."""
    if depth < 4:
        raise ValueError("depth must be >= 4")
    if delta is None:
        delta = group.delta()
    levels = group.level_matrices(depth)
    num = 0.0
    den = 0.0
    xw, yw = w.x, w.y
    for mats, _ in levels:
        a, b = mats[:, 0, 0], mats[:, 0, 1]
        c, d = mats[:, 1, 0], mats[:, 1, 1]
        # stable real form: complex division underflows Im(g.w) for deep words
        dd = (c * xw + d) ** 2 + (c * yw) ** 2
        gx = ((a * xw + b) * (c * xw + d) + a * c * yw * yw) / dd
        gy = yw / dd
        cosh_d = 1.0 + (gx * gx + (gy - 1.0) ** 2) / (2.0 * gy)
        num += np.exp(-delta * np.arccosh(np.maximum(cosh_d, 1.0))).sum()
        den += np.exp(-delta * kernels.displacements(mats)).sum()
    return float(num / den)


@dataclass(frozen=True)
class HorocycleMeasure:
    """Atomic measure in the time parameter of the horocycle through a frame."""

    ts: np.ndarray
    weights: np.ndarray
    frame: GroupElement
    delta: float
    depth: int

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.ts)))


def ps_on_horocycle(
    group: FuchsianGroup,
    g: GroupElement,
    depth: int,
    nu: AtomicBoundaryMeasure | None = None,
) -> HorocycleMeasure:
    """Transfer the boundary density to the horocycle {g n_t}: atom at
    t_j = g^{-1}.v_j with weight w_j e^{delta beta_{v_j}(i, g n_{t_j}.i)}."""
    if depth < 4:
        raise ValueError("depth must be >= 4")
    if nu is None:
        nu = ps_density(group, depth)
    gi = g.inverse()
    den = gi.c * nu.points + gi.d
    keep = np.abs(den) > 1e-13
    ts = (gi.a * nu.points[keep] + gi.b) / den[keep]
    v = nu.points[keep]
    # base points g n_t . i along the horocycle
    zt = (g.a * (ts + 1j) + g.b) / (g.c * (ts + 1j) + g.d)
    bus = (
        np.log((zt.real - v) ** 2 + zt.imag**2)
        - np.log(1.0 + v * v)
        - np.log(zt.imag)
    )
    # beta_v(i, z) = -busemann_base(v, z)
    w = nu.weights[keep] * np.exp(-nu.delta * bus)
    if nu.inf_weight > 0 and abs(gi.c) > 1e-13:
        t_inf = gi.a / gi.c
        z_inf = (g.a * (t_inf + 1j) + g.b) / (g.c * (t_inf + 1j) + g.d)
        # beta_oo(i, z) = log Im z
        w_inf = nu.inf_weight * math.exp(nu.delta * math.log(z_inf.imag))
        ts = np.append(ts, t_inf)
        w = np.append(w, w_inf)
    order = np.argsort(ts)
    return HorocycleMeasure(ts[order], w[order], g, nu.delta, depth)


def ball_mass(mu: HorocycleMeasure, T: float, window: str = "ball", eps: float | None = None) -> float:
    """Mass of {|t| <= T} (ball), {|t| >= T} (tail), or the annulus
    {(1-eps)T <= |t| <= (1+eps)T}."""
    if T <= 0:
        raise ValueError("T must be positive")
    at = np.abs(mu.ts)
    if window == "ball":
        return float(mu.weights[at <= T].sum())
    if window == "tail":
        return float(mu.weights[at >= T].sum())
    if window == "annulus":
        if eps is None or not (0 < eps <= 0.5) or T < 2:
            raise ValueError("annulus needs 0 < eps <= 1/2 and T >= 2")
        sel = (at >= (1 - eps) * T) & (at <= (1 + eps) * T)
        return float(mu.weights[sel].sum())
    raise ValueError(f"unknown window {window!r}")


def s_set_mass(eta: BoundaryPoint, t: float, nu: AtomicBoundaryMeasure) -> float:
    """Mass of the rotated tail k.{|u| >= e^t} where k.oo = eta."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if eta.is_infinity:
        k = identity()
    else:
        k = k_theta(math.atan2(1.0, -eta.value))
    ki = k.inverse()
    thresh = math.exp(t)
    den = ki.c * nu.points + ki.d
    with np.errstate(divide="ignore", invalid="ignore"):
        pulled = (ki.a * nu.points + ki.b) / den
    inside = np.abs(pulled) >= thresh
    inside |= np.abs(den) < 1e-300  # atom mapped to oo belongs to every tail
    m = float(nu.weights[inside].sum())
    if nu.inf_weight > 0:
        pulled_inf = ki.act(INFINITY)
        if pulled_inf.is_infinity or abs(pulled_inf.value) >= thresh:
            m += nu.inf_weight
    return m
