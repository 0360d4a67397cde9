"""Group builder: disk validation, pairing invariants, word enumeration,
fundamental-domain reduction, and critical-exponent estimates."""

import math

import numpy as np
import pytest

from horolab import fuchsian as F
from horolab.moebius import BoundaryPoint, PlanePoint, n_x


def symmetric_group():
    return F.build_group(
        F.PairedDisks((F.DiskPair(-1.5, 0.5, 1.5, 0.5), F.DiskPair(-4.5, 0.5, 4.5, 0.5)))
    )


# frozen from an independent Bowen-root computation at word length 8
SYMMETRIC_DELTA_L8 = 0.2574961312024553


def test_overlapping_disks_rejected():
    with pytest.raises(F.OverlappingDisks):
        F.PairedDisks((F.DiskPair(-0.5, 0.8, 0.5, 0.8),))


def test_pairing_boundary_to_boundary():
    g = symmetric_group()
    for j, pair in enumerate(g.disks.pairs):
        gen = g.generators[j]
        for t in np.linspace(0.0, 2 * math.pi, 17, endpoint=False):
            z = complex(pair.c + pair.r * math.cos(t), pair.r * math.sin(t))
            wimg = gen.act_complex(z)
            assert abs(abs(wimg - pair.c2) - pair.r2) < 1e-9


def test_pairing_exterior_to_interior():
    g = symmetric_group()
    for j, pair in enumerate(g.disks.pairs):
        gen = g.generators[j]
        far = gen.act_complex(complex(pair.c + 40.0, 3.0))
        assert abs(far - pair.c2) < pair.r2


def test_word_count_free():
    # cumulative count including the identity: 1 + sum 4 * 3^(l-1)
    g = symmetric_group()
    for level in range(1, 7):
        expect = 1 + sum(4 * 3 ** (l - 1) for l in range(1, level + 1))
        assert g.word_count(level) == expect


def test_enumerate_words_matches_level_matrices():
    g = symmetric_group()
    level = 3
    levels = g.level_matrices(level)
    words = list(g.enumerate_words(level))
    assert len(words) == g.word_count(level)
    def canon(vals):
        # projective matrices: fix the overall sign before comparing
        vals = tuple(round(v, 9) for v in vals)
        for v in vals:
            if v != 0:
                return vals if v > 0 else tuple(-x for x in vals)
        return vals

    enum_top = sorted(
        canon((w.matrix.a, w.matrix.b, w.matrix.c, w.matrix.d))
        for w in words
        if len(w.letters) == level
    )
    mats_top = sorted(canon(m.reshape(4)) for m in levels[level][0])
    assert enum_top == mats_top


def test_word_from_signed_free_reduction():
    g = symmetric_group()
    w = g.word_from_signed((1, -1, 2))
    w2 = g.word_from_signed((2,))
    assert w.letters == w2.letters
    assert w.matrix.close_to(w2.matrix, 1e-12)


def test_reduce_point_lands_in_domain():
    g = symmetric_group()
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = PlanePoint(rng.uniform(-6, 6), math.exp(rng.uniform(-2, 2)))
        zr, word = g.reduce_point(z)
        assert g.in_fundamental_domain(zr.z, margin=-1e-9)
        # word.matrix maps the canonical point back to the input
        back = word.matrix.act(zr)
        assert abs(back.z - z.z) < 1e-6


def test_bowen_delta_frozen():
    g = symmetric_group()
    delta, spread = g.estimate_delta(8, "bowen")
    assert abs(delta - SYMMETRIC_DELTA_L8) < 1e-12
    assert spread < 0.05


def test_bowen_vs_poincare_agree():
    g = symmetric_group()
    d_b, _ = g.estimate_delta(8, "bowen")
    d_p, _ = g.estimate_delta(8, "poincare")
    assert abs(d_b - d_p) < 0.08


def test_attracting_fixed_point():
    g = symmetric_group()
    for gen in g.generators:
        u = F.attracting_fixed_point(gen)
        # fixed, and attracting: |derivative| = |cu+d|^{-2} < 1
        assert abs(gen.act_real(u.value) - u.value) < 1e-9
        assert abs(gen.c * u.value + gen.d) > 1.0
        v = F.repelling_fixed_point(gen)
        assert abs(gen.c * v.value + gen.d) < 1.0


def test_limit_samples_structure():
    g = symmetric_group()
    pts, finite, disps, firsts = g.limit_samples(5)
    assert len(pts) == 4 * 3 ** 4
    assert disps.min() > 0
    # first-letter blocks are uniform in prefix-major order
    block = 3 ** 4
    assert np.all(firsts[:block] == firsts[0])
    assert len(np.unique(firsts)) == 4
    # every finite cylinder point lies in one of the four disks
    disks = [(p.c, p.r) for p in g.disks.pairs] + [(p.c2, p.r2) for p in g.disks.pairs]
    for p, fin in zip(pts[:200], finite[:200]):
        if fin:
            assert any(abs(p - c) <= r + 1e-9 for c, r in disks)


def test_cusped_group_parses_and_validates():
    pairs = (
        F.DiskPair(-0.5, math.inf, 0.5, math.inf, parabolic=True),
        F.DiskPair(-0.25, 0.1, 0.25, 0.1),
    )
    g = F.build_group(F.PairedDisks(pairs))
    assert g.has_cusp
    # the parabolic generator is a unit translation
    par = g.generators[0]
    assert par.close_to(n_x(1.0), 1e-12) or par.close_to(n_x(-1.0), 1e-12)


def test_radial_frame_points_at_word_limit():
    g = symmetric_group()
    w = g.word_from_signed((1,))
    fr = F.radial_frame(g, w)
    plus = fr.act(BoundaryPoint(math.inf)) if False else None
    from horolab.moebius import visual_points

    p, m = visual_points(fr)
    u = F.attracting_fixed_point(g.generators[0])
    v = F.repelling_fixed_point(g.generators[0])
    assert abs(p.value - u.value) < 1e-9
    assert abs(m.value - v.value) < 1e-9


def test_parse_group_config_roundtrip():
    text = """
kind = schottky
pair = -1.5 0.5 4.5 0.5
pair = -4.5 0.5 1.5 0.5
depth = 9
bump = 0.0 1.0 0.7 0.3 0.4 0.3 4 1.0
"""
    disks, options, raw = F.parse_group_config(text)
    assert len(disks.pairs) == 2
    assert int(options["depth"]) == 9
    assert len(options["bumps"]) == 1
    g = F.build_group(disks)
    assert g.rank == 2
