"""Invariant height function: depth of cusp excursions, identically 1 for
convex cocompact groups."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fuchsian import FuchsianGroup
from .moebius import INFINITY, BoundaryPoint, GroupElement, PlanePoint, identity, iwasawa

DEDUP_TOL = 1e-12


class NoCusp(ValueError):
    pass


@dataclass(frozen=True)
class CuspData:
    """Representatives (eta, h_eta) with h_eta . eta = oo, one per parabolic
    fixed point discovered up to the word-length budget."""

    points: tuple  # BoundaryPoint per entry
    normalizers: tuple  # GroupElement per entry
    level: int

    def matrices(self):
        m = np.empty((len(self.normalizers), 2, 2))
        for i, h in enumerate(self.normalizers):
            m[i] = [[h.a, h.b], [h.c, h.d]]
        return m


def cusp_orbit(group: FuchsianGroup, L: int) -> CuspData:
    """Parabolic fixed points gamma.oo for |gamma| <= L, as (gamma.oo, gamma^-1)."""
    if not group.has_cusp:
        raise NoCusp("group is convex cocompact")
    points = [INFINITY]
    normalizers = [identity()]
    seen_finite = {}
    for word in group.enumerate_words(L):
        g = word.matrix
        eta = g.act(INFINITY)
        if eta.is_infinity:
            continue
        key = round(eta.value / DEDUP_TOL)
        if key in seen_finite:
            continue
        seen_finite[key] = True
        points.append(eta)
        normalizers.append(g.inverse())
    return CuspData(tuple(points), tuple(normalizers), L)


def _orbit_heights(mats, z: complex):
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    den = (c * z.real + d) ** 2 + (c * z.imag) ** 2
    return z.imag / den


def invariant_height(
    group: FuchsianGroup, z: PlanePoint, L: int = 8, cusps: CuspData | None = None
) -> float:
    """max(1, sup over cusp representatives of Im(h_eta . z)), truncated at
    word length L; exactly 1 for convex cocompact groups."""
    if not group.has_cusp:
        return 1.0
    if cusps is None or cusps.level < L:
        cusps = cusp_orbit(group, L)
    heights = _orbit_heights(cusps.matrices(), z.z)
    return float(max(1.0, heights.max()))


def frame_height(
    group: FuchsianGroup, g: GroupElement, L: int = 8, cusps: CuspData | None = None
) -> float:
    """Height of a frame through its base point: depends only on n_x a_y."""
    x, y, _ = iwasawa(g, "NAK")
    return invariant_height(group, PlanePoint(x, y), L, cusps)


def horoball_membership(cusps: CuspData, z: PlanePoint):
    """Indices of cusp representatives whose height at z exceeds 1."""
    heights = _orbit_heights(cusps.matrices(), z.z)
    return np.nonzero(heights > 1.0)[0]
