"""Invariant height: trivial for convex cocompact groups, cusp-invariant
and >= 1 for the cusped example."""

import math

import numpy as np
import pytest

from horolab import fuchsian as F, height as H
from horolab.moebius import PlanePoint, n_x


def cusped_group():
    pairs = (
        F.DiskPair(-0.5, math.inf, 0.5, math.inf, parabolic=True),
        F.DiskPair(-0.25, 0.1, 0.25, 0.1),
    )
    return F.build_group(F.PairedDisks(pairs))


def cocompact_group():
    return F.build_group(
        F.PairedDisks((F.DiskPair(-1.5, 0.5, 1.5, 0.5), F.DiskPair(-4.5, 0.5, 4.5, 0.5)))
    )


def test_convex_cocompact_height_is_one():
    g = cocompact_group()
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = PlanePoint(rng.uniform(-5, 5), math.exp(rng.uniform(-2, 2)))
        assert H.invariant_height(g, z) == 1.0


def test_cusp_orbit_requires_cusp():
    with pytest.raises(H.NoCusp):
        H.cusp_orbit(cocompact_group(), 4)


def test_height_at_least_one():
    g = cusped_group()
    cusps = H.cusp_orbit(g, 6)
    rng = np.random.default_rng(1)
    for _ in range(30):
        z = PlanePoint(rng.uniform(-0.5, 0.5), math.exp(rng.uniform(-2, 2)))
        assert H.invariant_height(g, z, 6, cusps) >= 1.0


def test_height_grows_into_cusp():
    # deep in the cusp at oo, the height equals Im z
    g = cusped_group()
    cusps = H.cusp_orbit(g, 6)
    for y in (5.0, 50.0, 500.0):
        val = H.invariant_height(g, PlanePoint(0.1, y), 6, cusps)
        assert abs(val - y) < 1e-9


def test_height_group_invariance():
    g = cusped_group()
    cusps = H.cusp_orbit(g, 8)
    rng = np.random.default_rng(2)
    gammas = [g.word_from_signed(s).matrix for s in ((1,), (2,), (1, 2), (-2, 1))]
    for _ in range(15):
        z = PlanePoint(rng.uniform(-0.4, 0.4), math.exp(rng.uniform(-1.5, 1.0)))
        base = H.invariant_height(g, z, 8, cusps)
        for gamma in gammas:
            moved = H.invariant_height(g, gamma.act(z), 8, cusps)
            # finite word-length truncation: exact for the translation,
            # close for short hyperbolic words
            assert abs(moved - base) / base < 5e-2


def test_height_parabolic_invariance_exact():
    g = cusped_group()
    cusps = H.cusp_orbit(g, 6)
    rng = np.random.default_rng(3)
    for _ in range(20):
        z = PlanePoint(rng.uniform(-0.5, 0.5), math.exp(rng.uniform(-2, 2)))
        a = H.invariant_height(g, z, 6, cusps)
        b = H.invariant_height(g, n_x(1.0).act(z), 6, cusps)
        assert abs(a - b) / a < 1e-6


def test_horoballs_disjoint():
    # a point can be deep (height > 1) in at most one cusp horoball
    g = cusped_group()
    cusps = H.cusp_orbit(g, 8)
    rng = np.random.default_rng(4)
    for _ in range(200):
        z = PlanePoint(rng.uniform(-0.5, 0.5), math.exp(rng.uniform(-3, 3)))
        idx = H.horoball_membership(cusps, z)
        # representatives may repeat a parabolic point's orbit; count
        # distinct parabolic points instead of raw indices
        pts = {round(cusps.points[i].value, 6) if not cusps.points[i].is_infinity else "inf" for i in idx}
        assert len(pts) <= 1


def test_frame_height_only_depends_on_base_point():
    from horolab.moebius import a_y, k_theta

    g = cusped_group()
    cusps = H.cusp_orbit(g, 6)
    fr = n_x(0.2) * a_y(3.0)
    v1 = H.frame_height(g, fr, 6, cusps)
    v2 = H.frame_height(g, fr * k_theta(0.9), 6, cusps)
    assert abs(v1 - v2) < 1e-12
