"""Test functions on the frame bundle and the boundary functionals: support
geometry, quadrature oracles, and the exact flow-scaling identities."""

import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from horolab import conformal as C, flow
from horolab.fuchsian import DiskPair, PairedDisks, build_group, radial_frame
from horolab.moebius import (
    PlanePoint,
    a_y,
    k_theta,
    n_x,
    recompose,
    visual_points,
)

DELTA = 0.7


def bump(theta=0.9, radii=(0.4, 0.35, 0.4), order=3):
    return flow.BumpFunction(recompose(0.3, 1.4, theta, "NAK"), radii, order, 1.0)


def atomic(points, weights):
    return C.AtomicBoundaryMeasure(
        np.asarray(points, dtype=float),
        np.asarray(weights, dtype=float),
        0.0,
        PlanePoint(0.0, 1.0),
        DELTA,
        4,
        None,
    )


def test_bump_validation():
    g = recompose(0.0, 1.0, 0.5, "NAK")
    with pytest.raises(ValueError):
        flow.BumpFunction(g, (0.3, 0.3, 0.3), 1, 1.0)
    with pytest.raises(ValueError):
        flow.BumpFunction(g, (0.3, -0.1, 0.3), 4, 1.0)
    with pytest.raises(ValueError):
        flow.BumpFunction(g, (0.3, 0.3, 1.6), 4, 1.0)


def test_bump_support_box():
    f = bump()
    assert abs(f.value(f.center) - 1.0) < 1e-12
    # just outside each face of the box the value vanishes
    for dx, dy, dt in ((1.01, 0, 0), (0, 1.01, 0), (0, 0, 1.01), (-1.01, 0, 0)):
        h = recompose(
            0.3 + dx * 0.4, 1.4 * math.exp(dy * 0.35), 0.9 + dt * 0.4, "NAK"
        )
        assert f.value(h) == 0.0
    # interior positivity
    h = recompose(0.3 + 0.2, 1.4 * math.exp(-0.1), 0.9 + 0.15, "NAK")
    assert f.value(h) > 0


def test_bump_value_batch_matches_scalar():
    f = bump()
    rng = np.random.default_rng(0)
    mats = []
    vals = []
    for _ in range(200):
        h = recompose(
            rng.uniform(-0.5, 1.0),
            math.exp(rng.uniform(-0.5, 0.8)),
            rng.uniform(0.0, math.pi),
            "NAK",
        )
        mats.append([[h.a, h.b], [h.c, h.d]])
        vals.append(f.value(h))
    out = f.value_batch(np.array(mats))
    assert np.allclose(out, vals, atol=1e-12)


def test_right_translate():
    f = bump()
    g = n_x(0.2) * a_y(1.3) * k_theta(0.1)
    ft = f.right_translate(g)
    for h in (recompose(0.25, 1.5, 0.85, "NAK"), recompose(0.4, 1.2, 1.0, "NAK")):
        assert abs(ft.value(h) - f.value(h * g)) < 1e-12


def test_smooth_weight():
    w = flow.SmoothWeight(0.5, 2.0, 4, 3.0)
    assert w.support == (-1.5, 2.5)
    assert w(0.5) == 3.0
    assert w(-1.5) == 0.0
    assert w(10.0) == 0.0
    assert 0 < w(1.7) < 3.0


def test_adaptive_line_integral_matches_quad():
    def fvec(ts):
        return np.exp(-(ts**2)) * np.cos(3 * ts)

    val = flow.adaptive_line_integral(fvec, -2.0, 3.0, flow.QuadratureSpec(1e-10, 40000))
    ref, _ = quad(lambda t: math.exp(-t * t) * math.cos(3 * t), -2.0, 3.0, epsabs=1e-12)
    assert abs(val - ref) < 1e-9


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        flow.QuadratureSpec(-1.0, 100)


# ---------------------------------------------------------------------------
# boundary functionals against independent scalar quadrature


def test_br_single_atom_against_dblquad():
    f = bump()
    u_plus, _ = visual_points(f.center)
    u = u_plus.value
    nu = atomic([u], [1.0])
    q = flow.QuadratureSpec(1e-8, 40000)
    val = flow.br_measure(f, nu, q)
    assert val > 0
    theta = math.atan2(1.0, -u)
    k = k_theta(theta)

    def integrand(x, l):
        h = k * a_y(math.exp(l)) * n_x(x)
        return f.value(h) * math.exp(DELTA * l)

    ref, err = dblquad(integrand, -2.0, 2.0, -2.0, 2.0, epsabs=1e-9)
    assert abs(val - ref) < 1e-6 * ref


def test_br_star_single_atom_against_dblquad():
    f = bump()
    _, u_minus = visual_points(f.center)
    v = u_minus.value
    nu = atomic([v], [1.0])
    q = flow.QuadratureSpec(1e-8, 40000)
    val = flow.br_star_measure(f, nu, "hopf", q)
    assert val > 0
    from horolab.moebius import busemann_base, hopf_inverse, HopfCoordinates, BoundaryPoint

    def integrand(s, u):
        h = hopf_inverse(
            HopfCoordinates(BoundaryPoint(u), BoundaryPoint(v), s)
        )
        z = h.act(PlanePoint(0.0, 1.0))
        bm = busemann_base(BoundaryPoint(v), z)
        bp = busemann_base(BoundaryPoint(u), z)
        return f.value(h) * math.exp(-DELTA * bm) * math.exp(-bp) / (1.0 + u * u)

    up, _ = visual_points(f.center)
    ref, err = dblquad(integrand, up.value - 1.5, up.value + 1.5, -2.5, 2.5, epsabs=1e-9)
    assert abs(val - ref) < 1e-5 * ref


def many_atom_nu(f, n=40, seed=1):
    _, u_minus = visual_points(f.center)
    rng = np.random.default_rng(seed)
    pts = u_minus.value + rng.normal(0.0, 0.3, n)
    wts = rng.uniform(0.2, 1.0, n)
    return atomic(pts, wts)


def test_br_n_recentering_invariance():
    f = bump()
    up, _ = visual_points(f.center)
    nu = atomic([up.value, up.value + 0.15], [0.7, 0.5])
    q = flow.QuadratureSpec(1e-8, 40000)
    a = flow.br_measure(f, nu, q)
    b = flow.br_measure(f.right_translate(n_x(0.37)), nu, q)
    assert abs(a - b) < 1e-10 * a


def test_br_flow_scaling_exact():
    # right translation by a_{e^t} scales the functional by e^{(1-delta)t}
    f = bump()
    up, _ = visual_points(f.center)
    nu = atomic([up.value, up.value + 0.1], [0.7, 0.5])
    q = flow.QuadratureSpec(1e-8, 40000)
    t = 0.3
    a = flow.br_measure(f, nu, q)
    b = flow.br_measure(f.right_translate(a_y(math.exp(t))), nu, q)
    assert abs(b / a - math.exp((1.0 - DELTA) * t)) < 1e-10


def test_br_star_flow_scaling_exact():
    f = bump()
    nu = many_atom_nu(f)
    q = flow.QuadratureSpec(1e-8, 40000)
    t = 0.3
    for mode in ("hopf", "nau"):
        a = flow.br_star_measure(f, nu, mode, q)
        b = flow.br_star_measure(f.right_translate(a_y(math.exp(t))), nu, mode, q)
        assert abs(b / a - math.exp((DELTA - 1.0) * t)) < 1e-10


def test_br_star_modes_agree():
    f = bump()
    nu = many_atom_nu(f)
    q = flow.QuadratureSpec(1e-8, 40000)
    a = flow.br_star_measure(f, nu, "hopf", q)
    b = flow.br_star_measure(f, nu, "nau", q)
    assert abs(a - b) < 1e-3 * a
    with pytest.raises(ValueError):
        flow.br_star_measure(f, nu, "bogus", q)


def test_br_star_infinity_leaf_rejected():
    # a support containing a frame with forward endpoint oo has no Hopf chart
    f = flow.BumpFunction(recompose(0.2, 1.3, 0.0, "NAK"), (0.2, 0.2, 0.2), 4, 1.0)
    nu = atomic([0.0], [1.0])
    with pytest.raises(flow.ChartViolation):
        flow.br_star_measure(f, nu, "hopf")


def test_br_star_nau_chart_violation():
    f = bump()
    nu = many_atom_nu(f)
    base = f.center * k_theta(-0.5 * math.pi)
    with pytest.raises(flow.ChartViolation):
        flow.br_star_measure(f, nu, "nau", chart_base=base)


# ---------------------------------------------------------------------------
# quotient-side integrals against brute-force sums


def small_group():
    return build_group(
        PairedDisks((DiskPair(-1.5, 0.5, 1.5, 0.5), DiskPair(-4.5, 0.5, 4.5, 0.5)))
    )


def domain_bump():
    return flow.BumpFunction(recompose(0.0, 1.0, 0.7, "NAK"), (0.3, 0.4, 0.3), 4, 1.0)


def test_check_single_chart():
    group = small_group()
    domain_bump().check_single_chart(group)
    # a support crossing into a pairing disk fails
    bad = flow.BumpFunction(recompose(1.5, 0.4, 0.7, "NAK"), (0.3, 0.4, 0.3), 4, 1.0)
    with pytest.raises(flow.SupportError):
        bad.check_single_chart(group)


def test_horocycle_integral_against_riemann_sum():
    group = small_group()
    f = domain_bump()
    g = radial_frame(group, group.word_from_signed((1,)))
    T = 5.0
    val = flow.horocycle_integral(group, f, g, T, flow.QuadratureSpec(1e-9, 40000))
    ts = np.linspace(-T, T, 4001)
    samples = [flow.eval_automorphic(group, f, g * n_x(float(t))) for t in ts]
    ref = np.trapezoid(samples, ts)
    assert abs(val - ref) < 5e-4 * max(ref, 1e-12)
    with pytest.raises(ValueError):
        flow.horocycle_integral(group, f, g, -1.0)


def test_translate_integral_against_riemann_sum():
    group = small_group()
    f = domain_bump()
    g = radial_frame(group, group.word_from_signed((1,)))
    w = flow.SmoothWeight(0.0, 1.0, 4, 1.0)
    y = 0.5
    val = flow.translate_integral(group, f, g, y, w, flow.QuadratureSpec(1e-9, 40000))
    ts = np.linspace(-1.0, 1.0, 4001)
    samples = [
        flow.eval_automorphic(group, f, g * n_x(float(t)) * a_y(y)) * w(float(t))
        for t in ts
    ]
    ref = np.trapezoid(samples, ts)
    assert abs(val - ref) < 5e-4 * max(ref, 1e-12)
    with pytest.raises(ValueError):
        flow.translate_integral(group, f, g, 1.5, w)
