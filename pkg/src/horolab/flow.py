"""Compactly supported test functions on the quotient frame bundle and the
integrals of the equidistribution experiments: horocycle and translate
integrals, and the two boundary-measure functionals they converge to."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .conformal import AtomicBoundaryMeasure, lebesgue_density
from .fuchsian import FuchsianGroup
from .moebius import (
    GroupElement,
    NotInCell,
    PlanePoint,
    a_y,
    bruhat_nau,
    identity,
    iwasawa,
    k_theta,
    n_x,
    nstar_u,
    recompose,
)


class ChartViolation(ValueError):
    pass


class SupportError(ValueError):
    pass


class QuadratureBudget(RuntimeError):
    def __init__(self, msg, partial, estimate):
        super().__init__(msg)
        self.partial = partial
        self.estimate = estimate


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-8
    max_panels: int = 40000

    def __post_init__(self):
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")


def _wrap_angle(t: float) -> float:
    """Reduce an angle difference to [-pi/2, pi/2) modulo pi."""
    return (t + 0.5 * math.pi) % math.pi - 0.5 * math.pi


@dataclass(frozen=True)
class BumpFunction:
    """Polynomial bump in NAK offsets around a center frame; support is a
    single coordinate box so quotient evaluation needs no orbit sum."""

    center: GroupElement
    radii: tuple  # (r_x, r_y, r_theta)
    order: int = 4
    amplitude: float = 1.0
    # optional right pre-translation: value(h) = base_value(h * pre)
    pre: GroupElement | None = None
    _nak: tuple = field(init=False, repr=False)

    def right_translate(self, g: GroupElement) -> "BumpFunction":
        """The function h -> f(h g); support moves to (support) g^{-1}."""
        new_pre = g if self.pre is None else (g * self.pre)
        return BumpFunction(self.center, self.radii, self.order, self.amplitude, new_pre)

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if min(self.radii) <= 0:
            raise ValueError("radii must be positive")
        if self.radii[2] >= 0.5 * math.pi:
            raise ValueError("theta radius must stay below pi/2")
        object.__setattr__(self, "_nak", iwasawa(self.center, "NAK"))

    def offsets(self, x: float, y: float, theta: float):
        xc, yc, tc = self._nak
        rx, ry, rt = self.radii
        return (
            (x - xc) / rx,
            math.log(y / yc) / ry,
            _wrap_angle(theta - tc) / rt,
        )

    def value_nak(self, x: float, y: float, theta: float) -> float:
        sx, sy, st = self.offsets(x, y, theta)
        if abs(sx) >= 1.0 or abs(sy) >= 1.0 or abs(st) >= 1.0:
            return 0.0
        m = self.order
        return self.amplitude * (
            ((1.0 - sx * sx) * (1.0 - sy * sy) * (1.0 - st * st)) ** m
        )

    def value(self, h: GroupElement) -> float:
        if self.pre is not None:
            h = h * self.pre
        x, y, theta = iwasawa(h, "NAK")
        return self.value_nak(x, y, theta)

    def value_batch(self, mats: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over a (M, 2, 2) stack of frames."""
        if self.pre is not None:
            p = self.pre
            mats = mats @ np.array([[p.a, p.b], [p.c, p.d]])
        a, b = mats[:, 0, 0], mats[:, 0, 1]
        c, d = mats[:, 1, 0], mats[:, 1, 1]
        nsq = c * c + d * d
        y = 1.0 / nsq
        x = (a * c + b * d) * y
        theta = np.arctan2(-c, d) % math.pi
        xc, yc, tc = self._nak
        rx, ry, rt = self.radii
        sx = (x - xc) / rx
        sy = (np.log(y) - math.log(yc)) / ry
        st = ((theta - tc + 0.5 * math.pi) % math.pi - 0.5 * math.pi) / rt
        inside = (np.abs(sx) < 1.0) & (np.abs(sy) < 1.0) & (np.abs(st) < 1.0)
        out = np.zeros(mats.shape[0])
        m = self.order
        sxi, syi, sti = sx[inside], sy[inside], st[inside]
        out[inside] = self.amplitude * (
            ((1.0 - sxi * sxi) * (1.0 - syi * syi) * (1.0 - sti * sti)) ** m
        )
        return out

    def support_probes(self, n_per_axis: int = 3):
        """Frames spanning the support box (corners, edge and face centers)."""
        xc, yc, tc = self._nak
        rx, ry, rt = self.radii
        probes = []
        offs = np.linspace(-1.0, 1.0, n_per_axis)
        inv_pre = self.pre.inverse() if self.pre is not None else None
        for ox in offs:
            for oy in offs:
                for ot in offs:
                    h = recompose(
                        xc + ox * rx, yc * math.exp(oy * ry), tc + ot * rt, "NAK"
                    )
                    probes.append(h if inv_pre is None else h * inv_pre)
        return probes

    def check_single_chart(self, group: FuchsianGroup, margin: float = 1e-9):
        """The support box, reduced into the fundamental domain, must stay
        strictly interior so the quotient evaluation is a one-term sum."""
        for h in self.support_probes(3):
            x, y, _ = iwasawa(h, "NAK")
            if not group.in_fundamental_domain(complex(x, y), margin):
                raise SupportError(
                    "bump support touches the fundamental domain boundary"
                )


def eval_automorphic(group: FuchsianGroup, f: BumpFunction, h: GroupElement) -> float:
    """f as a function on the quotient: reduce the frame, then evaluate."""
    canon, _ = group.reduce_frame(h)
    return f.value(canon)


# ---------------------------------------------------------------------------
# 1-D adaptive panel quadrature (Gauss 7 with Gauss 15 error control)

_X7, _W7 = leggauss(7)
_X15, _W15 = leggauss(15)


def _panel_estimates(fvec, lo, hi):
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    v7 = half * np.dot(_W7, fvec(mid + half * _X7))
    v15 = half * np.dot(_W15, fvec(mid + half * _X15))
    return v15, abs(v15 - v7)


def adaptive_line_integral(fvec, a: float, b: float, q: QuadratureSpec) -> float:
    """Adaptive bisection with a fixed-order panel rule; fvec maps an array
    of abscissae to an array of values."""
    panels = [(a, b)]
    total = 0.0
    used = 0
    while panels:
        lo, hi = panels.pop()
        val, err = _panel_estimates(fvec, lo, hi)
        used += 1
        if used > q.max_panels:
            raise QuadratureBudget("1-D quadrature budget exhausted", total + val, err)
        if err <= q.abs_tol * (hi - lo) / (b - a) or (hi - lo) < 1e-12 * (b - a):
            total += val
        else:
            mid = 0.5 * (lo + hi)
            panels.append((lo, mid))
            panels.append((mid, hi))
    return total


# ---------------------------------------------------------------------------
# orbit integrals


def horocycle_integral(
    group: FuchsianGroup,
    f: BumpFunction,
    g: GroupElement,
    T: float,
    q: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Integral of the quotient function over {g n_t : |t| <= T}.

    A uniform scan locates the support windows (the pulled-back support is
    a union of intervals whose width is bounded below by the bump's x-extent
    divided by the local horocycle speed), then each window is integrated
    adaptively.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    _, yc, _ = f._nak
    ry = f.radii[1]
    # time-scale of one support crossing is of order r_x / y at the bump
    # height; scan at a quarter of the worst case
    step = f.radii[0] / (4.0 * yc * math.exp(ry))
    step = min(step, T / 8.0)
    n = int(math.ceil(2 * T / step))
    ts = np.linspace(-T, T, n + 1)

    def value_at(tv):
        return eval_automorphic(group, f, g * n_x(float(tv)))

    hits = np.array([value_at(t) > 0.0 for t in ts])
    windows = []
    i = 0
    while i <= n:
        if hits[i]:
            j = i
            while j + 1 <= n and hits[j + 1]:
                j += 1
            lo = ts[max(0, i - 2)]
            hi = ts[min(n, j + 2)]
            if windows and lo <= windows[-1][1]:
                windows[-1] = (windows[-1][0], hi)
            else:
                windows.append((lo, hi))
            i = j + 1
        else:
            i += 1

    def fvec(arr):
        return np.array([value_at(t) for t in arr])

    total = 0.0
    for lo, hi in windows:
        total += adaptive_line_integral(fvec, lo, hi, q)
    return total


def translate_integral(
    group: FuchsianGroup,
    f: BumpFunction,
    g: GroupElement,
    y: float,
    weight,
    q: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Integral of t -> f(g n_t a_y) * weight(t) over the weight's support.

    Since n_t a_y = a_y n_{t/y}, shrinking y compresses each support crossing
    to a t-width of order y, so a uniform scan at that resolution locates the
    crossings before the adaptive rule integrates them.
    """
    if not (0 < y <= 1):
        raise ValueError("y must lie in (0, 1]")
    lo, hi = weight.support
    ay = a_y(y)
    _, yc, _ = f._nak
    step = y * f.radii[0] / (4.0 * yc * math.exp(f.radii[1]))
    step = min(step, (hi - lo) / 8.0)
    n = int(math.ceil((hi - lo) / step))
    ts = np.linspace(lo, hi, n + 1)

    def value_at(tv):
        return eval_automorphic(group, f, g * n_x(float(tv)) * ay)

    def fvec(arr):
        return np.array([value_at(t) * weight(float(t)) for t in arr])

    hits = np.array([value_at(t) > 0.0 for t in ts])
    total = 0.0
    i = 0
    windows = []
    while i <= n:
        if hits[i]:
            j = i
            while j + 1 <= n and hits[j + 1]:
                j += 1
            wlo = ts[max(0, i - 2)]
            whi = ts[min(n, j + 2)]
            if windows and wlo <= windows[-1][1]:
                windows[-1] = (windows[-1][0], whi)
            else:
                windows.append((wlo, whi))
            i = j + 1
        else:
            i += 1
    for wlo, whi in windows:
        total += adaptive_line_integral(fvec, wlo, whi, q)
    return total


@dataclass(frozen=True)
class SmoothWeight:
    """Compactly supported polynomial weight on the time axis."""

    center: float = 0.0
    radius: float = 1.0
    order: int = 4
    amplitude: float = 1.0

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def __call__(self, t: float) -> float:
        s = (t - self.center) / self.radius
        if abs(s) >= 1.0:
            return 0.0
        return self.amplitude * (1.0 - s * s) ** self.order


# ---------------------------------------------------------------------------
# boundary-measure functionals


def _mats_from_factors(k_mat, ys, xs, kind):
    """Stack of 2x2 frames k a_y n_x (kind='kan') built without object churn."""
    sq = np.sqrt(ys)
    a = np.empty((ys.size, 2, 2))
    # a_y n_x = [[sqrt y, x/sqrt y], [0, 1/sqrt y]]
    a[:, 0, 0] = sq
    a[:, 0, 1] = xs / sq
    a[:, 1, 0] = 0.0
    a[:, 1, 1] = 1.0 / sq
    return np.einsum("ij,mjk->mik", k_mat, a)




def _tensor_nodes(box, panels):
    """Gauss-Legendre tensor grid: `panels` panels of 7 nodes per axis."""
    x0, x1, y0, y1 = box
    ex = np.linspace(x0, x1, panels + 1)
    ey = np.linspace(y0, y1, panels + 1)
    hx = 0.5 * (ex[1] - ex[0])
    hy = 0.5 * (ey[1] - ey[0])
    xs = (0.5 * (ex[:-1] + ex[1:])[:, None] + hx * _X7[None, :]).ravel()
    ys = (0.5 * (ey[:-1] + ey[1:])[:, None] + hy * _X7[None, :]).ravel()
    wx = np.tile(hx * _W7, panels)
    wy = np.tile(hy * _W7, panels)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.outer(wx, wy)
    return X.ravel(), Y.ravel(), W.ravel()


def _refined(eval_at, q: QuadratureSpec):
    """Evaluate on a coarse and a fine grid; refine once more on disagreement."""
    coarse = eval_at(4)
    fine = eval_at(8)
    if abs(fine - coarse) > max(100.0 * q.abs_tol, 1e-3 * abs(fine)):
        finest = eval_at(16)
        if abs(finest - fine) > max(1000.0 * q.abs_tol, 1e-2 * abs(finest)):
            deepest = eval_at(32)
            if abs(deepest - finest) > max(1000.0 * q.abs_tol, 1e-2 * abs(deepest)):
                raise QuadratureBudget(
                    "2-D tensor quadrature did not stabilize",
                    deepest,
                    abs(deepest - finest),
                )
            return deepest
        return finest
    return fine


_ATOM_CHUNK = 256


def br_measure(
    f: BumpFunction,
    nu: AtomicBoundaryMeasure,
    q: QuadratureSpec = QuadratureSpec(1e-8, 40000),
) -> float:
    """Boundary functional in K-A-N coordinates: for each atom u_j fix the
    rotation k_j with k_j.oo = u_j and integrate f(k_j a_y n_x) y^{delta-1}
    over (y, x); the single-chart bump makes the raw f the right integrand."""
    delta = nu.delta
    # coordinate ranges of the support in KAN coordinates, found by probing
    thetas, ys, xs = [], [], []
    for h in f.support_probes(5):
        hi = h.inverse()
        x_i, y_i, t_i = iwasawa(hi, "NAK")
        # KAN(h) comes from NAK(h^-1)
        thetas.append((-t_i) % math.pi)
        ys.append(1.0 / y_i)
        xs.append(-x_i)
    thetas = np.array(thetas)
    tc = thetas[len(thetas) // 2]
    spread = (thetas - tc + 0.5 * math.pi) % math.pi - 0.5 * math.pi
    pad_th = 0.25 * (spread.max() - spread.min()) + 1e-9
    pad_y = 0.5 * (math.log(max(ys)) - math.log(min(ys))) + 1e-9
    pad_x = 0.5 * (max(xs) - min(xs)) + 1e-9
    box = (
        math.log(min(ys)) - pad_y,
        math.log(max(ys)) + pad_y,
        min(xs) - pad_x,
        max(xs) + pad_x,
    )

    # atom directions: k.oo = u means theta = atan2(1, -u) mod pi
    angles = np.arctan2(1.0, -nu.points) % math.pi
    rel = (angles - tc + 0.5 * math.pi) % math.pi - 0.5 * math.pi
    sel = (rel >= spread.min() - pad_th) & (rel <= spread.max() + pad_th)
    us = nu.points[sel]
    ws = nu.weights[sel].copy()
    th_atoms = np.arctan2(1.0, -us)
    if nu.inf_weight > 0 and abs(_wrap_angle(-tc)) <= spread.max() - spread.min() + pad_th:
        th_atoms = np.append(th_atoms, 0.0)  # k = identity fixes oo
        ws = np.append(ws, nu.inf_weight)

    def eval_at(panels):
        l_nodes, x_nodes, wts = _tensor_nodes(box, panels)
        m = l_nodes.size
        sq = np.exp(0.5 * l_nodes)
        grid = np.empty((m, 2, 2))
        grid[:, 0, 0] = sq
        grid[:, 0, 1] = sq * x_nodes
        grid[:, 1, 0] = 0.0
        grid[:, 1, 1] = 1.0 / sq
        gw = wts * np.exp(delta * l_nodes)
        total = 0.0
        for lo in range(0, th_atoms.size, _ATOM_CHUNK):
            th = th_atoms[lo : lo + _ATOM_CHUNK]
            w = ws[lo : lo + _ATOM_CHUNK]
            k = np.empty((th.size, 2, 2))
            k[:, 0, 0] = np.cos(th)
            k[:, 0, 1] = np.sin(th)
            k[:, 1, 0] = -np.sin(th)
            k[:, 1, 1] = np.cos(th)
            mats = np.einsum("nij,mjk->nmik", k, grid).reshape(-1, 2, 2)
            vals = f.value_batch(mats).reshape(th.size, m)
            total += float(w @ (vals @ gw))
        return total

    return _refined(eval_at, q)


def _hopf_frame_stack(u_plus, u_minus, s):
    """Vectorized frame construction from boundary endpoints and flow time."""
    d = u_plus - u_minus
    mats = np.empty((u_plus.size, 2, 2))
    sign = np.sign(d)
    sd = np.sqrt(np.abs(d))
    mats[:, 0, 0] = u_plus * sign / sd
    mats[:, 0, 1] = u_minus / sd
    mats[:, 1, 0] = sign / sd
    mats[:, 1, 1] = 1.0 / sd
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, dd = mats[:, 1, 0], mats[:, 1, 1]
    zi = (a * 1j + b) / (c * 1j + dd)
    # s0 = -busemann_base(u_plus, base.i); slide by a_{e^{s - s0}}
    s0 = -np.log(
        ((u_plus - zi.real) ** 2 + zi.imag**2) / ((1.0 + u_plus**2) * zi.imag)
    )
    t = np.exp(0.5 * (s - s0))
    out = np.empty_like(mats)
    out[:, 0, 0] = a * t
    out[:, 0, 1] = b / t
    out[:, 1, 0] = c * t
    out[:, 1, 1] = dd / t
    return out


def br_star_measure(
    f: BumpFunction,
    nu: AtomicBoundaryMeasure,
    mode: str = "hopf",
    q: QuadratureSpec = QuadratureSpec(1e-8, 40000),
    chart_base: GroupElement | None = None,
) -> float:
    """Contracting-horospherical functional; hopf mode integrates over
    (u_plus, s) per backward-endpoint atom, nau mode uses the N-A-U chart
    around the bump center."""
    from .moebius import hopf

    delta = nu.delta
    if mode == "hopf":
        um, up, ss = [], [], []
        for h in f.support_probes(5):
            co = hopf(h)
            if co.u_plus.is_infinity or co.u_minus.is_infinity:
                raise ChartViolation("support touches the infinity leaf")
            up.append(co.u_plus.value)
            um.append(co.u_minus.value)
            ss.append(co.s)
        pad_u = 0.5 * (max(up) - min(up)) + 1e-9
        pad_s = 0.5 * (max(ss) - min(ss)) + 1e-9
        pad_m = 0.5 * (max(um) - min(um)) + 1e-9
        box = (min(up) - pad_u, max(up) + pad_u, min(ss) - pad_s, max(ss) + pad_s)
        sel = (nu.points >= min(um) - pad_m) & (nu.points <= max(um) + pad_m)
        vs, ws = nu.points[sel], nu.weights[sel]

        def eval_at(panels):
            u_nodes, s_nodes, wts = _tensor_nodes(box, panels)
            m = u_nodes.size
            total = 0.0
            for lo in range(0, vs.size, _ATOM_CHUNK):
                v = vs[lo : lo + _ATOM_CHUNK]
                w = ws[lo : lo + _ATOM_CHUNK]
                n = v.size
                U = np.broadcast_to(u_nodes, (n, m)).ravel()
                S = np.broadcast_to(s_nodes, (n, m)).ravel()
                V = np.repeat(v, m)
                mats = _hopf_frame_stack(U, V, S)
                a, b = mats[:, 0, 0], mats[:, 0, 1]
                c, d = mats[:, 1, 0], mats[:, 1, 1]
                zi = (a * 1j + b) / (c * 1j + d)
                # beta_v(i, g.i) and beta_{u+}(i, g.i) with opposite sign
                bm = (
                    np.log((zi.real - V) ** 2 + zi.imag**2)
                    - np.log(1.0 + V * V)
                    - np.log(zi.imag)
                )
                bp = (
                    np.log((zi.real - U) ** 2 + zi.imag**2)
                    - np.log(1.0 + U * U)
                    - np.log(zi.imag)
                )
                dens = 1.0 / (1.0 + U * U)
                vals = (
                    f.value_batch(mats) * np.exp(-delta * bm) * np.exp(-bp) * dens
                ).reshape(n, m)
                total += float(w @ (vals @ wts))
            return total

        return _refined(eval_at, q)
    if mode == "nau":
        base = chart_base if chart_base is not None else f.center
        bi = base.inverse()
        xs, ys, us = [], [], []
        for h in f.support_probes(5):
            rel = bi * h
            if abs(rel.d) < 1e-6:
                raise ChartViolation("support leaves the N-A-U chart (d -> 0)")
            x, y, u = bruhat_nau(rel)
            xs.append(x)
            ys.append(y)
            us.append(u)
        pad_x = 0.5 * (max(xs) - min(xs)) + 1e-9
        pad_y = 0.5 * (math.log(max(ys)) - math.log(min(ys))) + 1e-9
        pad_u = 0.5 * (max(us) - min(us)) + 1e-9
        box = (
            math.log(min(ys)) - pad_y,
            math.log(max(ys)) + pad_y,
            min(us) - pad_u,
            max(us) + pad_u,
        )
        # atoms are backward endpoints of chart frames: v = g.x, x_j = g^{-1}.v_j
        den = bi.c * nu.points + bi.d
        keep = np.abs(den) > 1e-13
        with np.errstate(divide="ignore", invalid="ignore"):
            xj_all = (bi.a * nu.points + bi.b) / den
        sel = keep & (xj_all >= min(xs) - pad_x) & (xj_all <= max(xs) + pad_x)
        vs, xjs, ws = nu.points[sel], xj_all[sel], nu.weights[sel]
        bm = np.array([[base.a, base.b], [base.c, base.d]])

        def eval_at(panels):
            l_nodes, u_nodes, wts = _tensor_nodes(box, panels)
            m = l_nodes.size
            sq = np.exp(0.5 * l_nodes)
            # a_y n*_u = [[sqrt y, 0], [u/sqrt y, 1/sqrt y]]
            grid = np.empty((m, 2, 2))
            grid[:, 0, 0] = sq
            grid[:, 0, 1] = 0.0
            grid[:, 1, 0] = u_nodes / sq
            grid[:, 1, 1] = 1.0 / sq
            gw = wts * np.exp(-delta * l_nodes)
            total = 0.0
            for lo in range(0, vs.size, _ATOM_CHUNK):
                v = vs[lo : lo + _ATOM_CHUNK]
                xj = xjs[lo : lo + _ATOM_CHUNK]
                w = ws[lo : lo + _ATOM_CHUNK]
                n = v.size
                left = np.empty((n, 2, 2))
                # base * n_x
                left[:, 0, 0] = bm[0, 0]
                left[:, 0, 1] = bm[0, 0] * xj + bm[0, 1]
                left[:, 1, 0] = bm[1, 0]
                left[:, 1, 1] = bm[1, 0] * xj + bm[1, 1]
                zi = (left[:, 0, 0] * 1j + left[:, 0, 1]) / (
                    left[:, 1, 0] * 1j + left[:, 1, 1]
                )
                beta = -(
                    np.log((zi.real - v) ** 2 + zi.imag**2)
                    - np.log(1.0 + v * v)
                    - np.log(zi.imag)
                )
                pref = w * np.exp(delta * beta)
                mats = np.einsum("nij,mjk->nmik", left, grid).reshape(-1, 2, 2)
                vals = f.value_batch(mats).reshape(n, m)
                total += float(pref @ (vals @ gw))
            return total

        return _refined(eval_at, q)
    raise ValueError(f"unknown mode {mode!r}")
