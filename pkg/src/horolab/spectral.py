"""Special functions attached to the critical exponent (c_n, kappa_n, psi_n)
and base eigenfunctions evaluated against atomic boundary measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import lgamma

import numpy as np
from scipy.integrate import quad

from . import kernels
from .conformal import AtomicBoundaryMeasure
from .moebius import GroupElement, PlanePoint, iwasawa

MAX_N = 64


class PoleError(ValueError):
    pass


class QuadratureBudget(RuntimeError):
    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


# counts boundary atoms at oo skipped during eigenfunction sums
skipped_infinite_atoms = 0


@dataclass(frozen=True)
class SpectralParams:
    delta: float
    n: int = 0

    def __post_init__(self):
        if abs(self.n) > MAX_N:
            raise ValueError(f"|n| must be <= {MAX_N}")
        if not (0.0 < self.delta <= 1.0):
            raise ValueError("delta must lie in (0, 1]")

    def require_kappa(self):
        if not (0.5 < self.delta < 1.0):
            raise PoleError("kappa requires delta in (1/2, 1)")


def c_n(p: SpectralParams) -> float:
    """sqrt(Gamma(1-d)Gamma(|n|+d) / (Gamma(d)Gamma(|n|+1-d))), via log-Gamma."""
    d, m = p.delta, abs(p.n)
    return math.exp(
        0.5 * (lgamma(1.0 - d) + lgamma(m + d) - lgamma(d) - lgamma(m + 1.0 - d))
    )


def kappa_0(delta: float) -> float:
    """Integral of (1+t^2)^{-delta} over the line: sqrt(pi) G(d-1/2)/G(d)."""
    if not (0.5 < delta < 1.0):
        raise PoleError("kappa requires delta in (1/2, 1)")
    return math.exp(0.5 * math.log(math.pi) + lgamma(delta - 0.5) - lgamma(delta))


def constants(p: SpectralParams):
    """(c_n, kappa_n) with kappa_n = kappa_0 / c_n^2 (all positive)."""
    p.require_kappa()
    c = c_n(p)
    return c, kappa_0(p.delta) / (c * c)


def psi(p: SpectralParams, t: float) -> complex:
    """(1+t^2)^{-delta} ((t-i)/(t+i))^n; unimodular phase times psi_0."""
    q = (1.0 + t * t) ** (-p.delta)
    if p.n == 0:
        return complex(q)
    base = (t - 1j) / (t + 1j)
    ph = 1.0 + 0.0j
    for _ in range(abs(p.n)):
        ph *= base
    if p.n < 0:
        ph = ph.conjugate() / abs(ph) ** 2
    return q * ph


def psi_integral(p: SpectralParams, a: float, b: float, tol: float = 1e-10) -> complex:
    """Adaptive quadrature of psi_n over [a, b] to absolute tolerance."""
    if a >= b:
        raise ValueError("need a < b")
    # split long tails logarithmically so the error estimator stays sharp
    knots = [10.0**k for k in range(0, 7)]
    pieces = sorted({a, b} | {s * t for t in knots for s in (-1.0, 1.0) if a < s * t < b})
    re = im = re_err = im_err = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        r, re1 = quad(lambda t: psi(p, t).real, lo, hi, epsabs=tol, epsrel=tol, limit=2000)
        i, im1 = quad(lambda t: psi(p, t).imag, lo, hi, epsabs=tol, epsrel=tol, limit=2000)
        re, im = re + r, im + i
        re_err, im_err = re_err + re1, im_err + im1
    if re_err + im_err > max(1000 * tol, 1e-7):
        raise QuadratureBudget(
            f"psi quadrature error {re_err + im_err:.2e} above tolerance",
            complex(re, im),
        )
    return complex(re, im)


def kappa_quadrature(p: SpectralParams, R: float = 1e4, tol: float = 1e-10) -> float:
    """kappa_n by quadrature over [-R, R] plus the two-term tail expansion;
    the tail of psi_n decays like t^{-2 delta}."""
    p.require_kappa()
    d, n = p.delta, p.n
    val = psi_integral(p, -R, R, tol).real
    # real part of psi_n(t) ~ t^{-2d}(1 - (d + 2n^2)/t^2 + ...) for large t;
    # both tails together integrate to:
    tail = 2.0 * (
        R ** (1.0 - 2.0 * d) / (2.0 * d - 1.0)
        - (d + 2.0 * n * n) * R ** (-1.0 - 2.0 * d) / (2.0 * d + 1.0)
    )
    return val + tail


def phi_tilde(p: SpectralParams, h: GroupElement, nu: AtomicBoundaryMeasure) -> complex:
    """Base eigenfunction against the atomic density:
    e^{2 i n theta} c_n sum_j w_j ((u_j^2+1)y/((x-u_j)^2+y^2))^d phase^n."""
    global skipped_infinite_atoms
    x, y, theta = iwasawa(h, "NAK")
    if nu.inf_weight > 0:
        skipped_infinite_atoms += 1
    s = kernels.eigenfunction_sums(nu.points, nu.weights, x, y, p.delta, p.n)
    return np.exp(2j * p.n * theta) * c_n(p) * s


def phi_tilde_at_point(p: SpectralParams, z: PlanePoint, nu: AtomicBoundaryMeasure) -> float:
    """phi_tilde_0 as a function on the plane (K-invariant part only)."""
    if p.n != 0:
        raise ValueError("point evaluation only defined for n = 0")
    global skipped_infinite_atoms
    if nu.inf_weight > 0:
        skipped_infinite_atoms += 1
    s = kernels.eigenfunction_sums(nu.points, nu.weights, z.x, z.y, p.delta, 0)
    return float(s.real)


def phi_on_horocycle(
    p: SpectralParams, g: GroupElement, ts: np.ndarray, nu: AtomicBoundaryMeasure
) -> np.ndarray:
    """phi_tilde_n(g n_t) for a batch of times t."""
    global skipped_infinite_atoms
    if nu.inf_weight > 0:
        skipped_infinite_atoms += 1
    ts = np.asarray(ts, dtype=np.float64)
    w = ts + 1j
    zs = (g.a * w + g.b) / (g.c * w + g.d)
    vals = kernels.eigenfunction_grid(
        nu.points, nu.weights, zs.real, zs.imag, p.delta, p.n
    )
    vals = c_n(p) * vals
    if p.n != 0:
        # K-angle of g n_t: theta = atan2(-c, c t + d)
        theta = np.arctan2(-g.c, g.c * ts + g.d)
        vals = vals * np.exp(2j * p.n * theta)
    return vals


def laplace_check(
    p: SpectralParams, nu: AtomicBoundaryMeasure, z: PlanePoint, step: float
):
    """5-point stencil check that -y^2 (d_xx + d_yy) phi_0 = d(1-d) phi_0."""
    if step > 1e-3 * z.y:
        raise ValueError("step too coarse for the stencil")

    def f(x, y):
        return phi_tilde_at_point(p, PlanePoint(x, y), nu)

    fc = f(z.x, z.y)
    dxx = (f(z.x + step, z.y) - 2 * fc + f(z.x - step, z.y)) / step**2
    dyy = (f(z.x, z.y + step) - 2 * fc + f(z.x, z.y - step)) / step**2
    lhs = -z.y * z.y * (dxx + dyy)
    rhs = p.delta * (1.0 - p.delta) * fc
    return lhs, rhs
