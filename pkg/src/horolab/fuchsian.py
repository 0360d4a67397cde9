"""Schottky and cusped-Schottky groups from circle pairings.

A group is given by pairs of boundary-orthogonal disks; each pair
produces one generator sending the exterior of its source disk onto the
interior of its target disk.  The cusped variant adds one parabolic
pairing, fixed to the translation z -> z + 1 pairing the half planes
Re z < -1/2 and Re z > 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .moebius import (
    INFINITY,
    BoundaryArc,
    BoundaryPoint,
    GroupElement,
    PlanePoint,
    hyp_dist,
    identity,
    n_x,
)

TANGENCY_TOL = 1e-9
DEFAULT_WORD_CAP = 5_000_000
REDUCE_STEP_CAP = 100_000


class OverlappingDisks(ValueError):
    pass


class BadPairing(ValueError):
    pass


class NonTermination(RuntimeError):
    pass


class EnumerationBudget(RuntimeError):
    pass


class Diverged(RuntimeError):
    pass


class ParabolicWord(ValueError):
    pass


@dataclass(frozen=True)
class DiskPair:
    """One pairing: (c, r) -> (c2, r2); radii are inf for the parabolic pair."""

    c: float
    r: float
    c2: float
    r2: float
    parabolic: bool = False

    def __post_init__(self):
        if self.parabolic:
            if not (
                self.c == -0.5
                and self.c2 == 0.5
                and math.isinf(self.r)
                and math.isinf(self.r2)
            ):
                raise BadPairing(
                    "parabolic pairing must be the half planes at Re = -1/2, 1/2"
                )
        elif self.r <= 0 or self.r2 <= 0 or math.isinf(self.r) or math.isinf(self.r2):
            raise BadPairing("disk radii must be finite and positive")


@dataclass(frozen=True)
class PairedDisks:
    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        n_par = sum(p.parabolic for p in self.pairs)
        if n_par > 1:
            raise BadPairing("at most one parabolic pairing is supported")
        disks = []
        for p in self.pairs:
            if p.parabolic:
                continue
            disks.append((p.c, p.r))
            disks.append((p.c2, p.r2))
        for i, (c1, r1) in enumerate(disks):
            for c2, r2 in disks[i + 1 :]:
                if abs(c1 - c2) < r1 + r2 - TANGENCY_TOL:
                    raise OverlappingDisks(
                        f"disks ({c1}, {r1}) and ({c2}, {r2}) overlap"
                    )
        if n_par:
            for c, r in disks:
                if abs(c) + r > 0.5 + TANGENCY_TOL:
                    raise OverlappingDisks(
                        "hyperbolic disks of a cusped group must lie in |Re z| <= 1/2"
                    )

    @property
    def has_cusp(self) -> bool:
        return any(p.parabolic for p in self.pairs)


def _pairing_map(c, r, c2, r2) -> GroupElement:
    # sends the circle (c, r) onto (c2, r2), exterior to interior
    return GroupElement(-c2, c * c2 + r * r2, -1.0, c)


@dataclass(frozen=True)
class Word:
    """Freely reduced word in the generators; letters are signed indices
    (+(j+1) for generator j, -(j+1) for its inverse)."""

    letters: tuple
    matrix: GroupElement
    displacement: float

    def __len__(self):
        return len(self.letters)


class FuchsianGroup:
    def __init__(self, disks: PairedDisks, word_cap: int = DEFAULT_WORD_CAP):
        self.disks = disks
        self.has_cusp = disks.has_cusp
        self.word_cap = word_cap
        self.generators = []
        self._par_index = None
        for j, p in enumerate(disks.pairs):
            if p.parabolic:
                self.generators.append(n_x(1.0))
                self._par_index = j
            else:
                self.generators.append(_pairing_map(p.c, p.r, p.c2, p.r2))
        self.rank = len(self.generators)
        self._delta = None
        self._delta_depth = None
        self._validate()

    # -- validation ---------------------------------------------------------

    def _validate(self):
        for j, p in enumerate(self.disks.pairs):
            if p.parabolic:
                continue
            g = self.generators[j]
            for phi in np.linspace(0.0, 2 * math.pi, 17)[:-1]:
                z = complex(p.c + p.r * math.cos(phi), p.r * math.sin(phi))
                w = g.act_complex(z)
                if abs(abs(w - p.c2) - p.r2) > 1e-9:
                    raise BadPairing(f"pair {j} does not map its circles correctly")
            far = g.act_complex(complex(p.c, 10.0 * (p.r + abs(p.c) + 1.0)))
            if abs(far - p.c2) >= p.r2:
                raise BadPairing(f"pair {j} does not send exterior to interior")

    # -- ping-pong combinatorics -------------------------------------------

    def letter_count(self) -> int:
        return 2 * self.rank

    def letter_matrix(self, letter: int) -> GroupElement:
        """letter in [0, 2k): j < k is generator j, j >= k its inverse."""
        if letter < self.rank:
            return self.generators[letter]
        return self.generators[letter - self.rank].inverse()

    def letter_signed(self, letter: int) -> int:
        return letter + 1 if letter < self.rank else -(letter - self.rank + 1)

    def _signed_to_letter(self, s: int) -> int:
        return s - 1 if s > 0 else self.rank + (-s) - 1

    def letter_region_contains(self, letter: int, z: complex) -> bool:
        """Open ping-pong region of a letter (the disk its words land in)."""
        j = letter % self.rank
        p = self.disks.pairs[j]
        if p.parabolic:
            return z.real > 0.5 if letter < self.rank else z.real < -0.5
        c, r = (p.c2, p.r2) if letter < self.rank else (p.c, p.r)
        return abs(z - c) < r

    def letter_interval(self, letter: int) -> BoundaryArc:
        j = letter % self.rank
        p = self.disks.pairs[j]
        if p.parabolic:
            if letter < self.rank:
                return BoundaryArc(((0.5, math.inf),), True)
            return BoundaryArc(((-math.inf, -0.5),), True)
        c, r = (p.c2, p.r2) if letter < self.rank else (p.c, p.r)
        return BoundaryArc(((c - r, c + r),))

    def in_fundamental_domain(self, z: complex, margin: float = 0.0) -> bool:
        for p in self.disks.pairs:
            if p.parabolic:
                if abs(z.real) > 0.5 - margin:
                    return False
            else:
                if abs(z - p.c) < p.r + margin or abs(z - p.c2) < p.r2 + margin:
                    return False
        return True

    # -- reduction ----------------------------------------------------------

    def reduce_point(self, p: PlanePoint):
        """Pull p into the closed fundamental domain; returns (canonical, Word).

        word.matrix applied to the canonical point recovers p.
        """
        z = p.z
        letters = []
        mat = identity()
        for _ in range(REDUCE_STEP_CAP):
            moved = False
            if self.has_cusp and abs(z.real) > 0.5:
                m = round(z.real)
                if m != 0:
                    z = complex(z.real - m, z.imag)
                    sgn = self._par_index + 1 if m > 0 else -(self._par_index + 1)
                    step = n_x(float(m))
                    letters.extend([sgn] * abs(m))
                    mat = mat * step
                    moved = True
            if not moved:
                for letter in range(self.letter_count()):
                    j = letter % self.rank
                    if self.disks.pairs[j].parabolic:
                        continue
                    if self.letter_region_contains(letter, z):
                        g = self.letter_matrix(letter)
                        z = g.inverse().act_complex(z)
                        letters.append(self.letter_signed(letter))
                        mat = mat * g
                        moved = True
                        break
            if not moved:
                return PlanePoint(z.real, z.imag), Word(
                    tuple(letters), mat, kernels.displacements(
                        np.array([[[mat.a, mat.b], [mat.c, mat.d]]])
                    )[0],
                )
        raise NonTermination("reduction did not terminate; group data invalid")

    def reduce_frame(self, g: GroupElement):
        """Left-canonical representative of the frame g; (canonical, Word)."""
        _, word = self.reduce_point(g.act(PlanePoint(0.0, 1.0)))
        return word.matrix.inverse() * g, word

    def word_from_signed(self, signed) -> Word:
        mat = identity()
        reduced = []
        for s in signed:
            if reduced and reduced[-1] == -s:
                reduced.pop()
            else:
                reduced.append(s)
        for s in reduced:
            mat = mat * self.letter_matrix(self._signed_to_letter(s))
        disp = kernels.displacements(np.array([[[mat.a, mat.b], [mat.c, mat.d]]]))[0]
        return Word(tuple(reduced), mat, disp)

    # -- enumeration --------------------------------------------------------

    def word_count(self, L: int) -> int:
        k2 = self.letter_count()
        return 1 + sum(k2 * (k2 - 1) ** (l - 1) for l in range(1, L + 1))

    def _check_budget(self, L: int):
        if self.word_count(L) > self.word_cap:
            raise EnumerationBudget(
                f"enumerating words to length {L} exceeds cap {self.word_cap}"
            )

    def _gen_arrays(self):
        k2 = self.letter_count()
        gens = np.empty((k2, 2, 2))
        for letter in range(k2):
            g = self.letter_matrix(letter)
            gens[letter] = [[g.a, g.b], [g.c, g.d]]
        inv_of = np.array(
            [letter + self.rank for letter in range(self.rank)]
            + [letter for letter in range(self.rank)],
            dtype=np.int64,
        )
        return gens, inv_of

    def level_matrices(self, L: int):
        """Arrays (mats, last_letters) for every reduced word of length
        exactly L, plus the same for all previous levels as a list."""
        self._check_budget(L)
        gens, inv_of = self._gen_arrays()
        mats = np.eye(2)[None, :, :].copy()
        last = np.array([-1], dtype=np.int64)
        levels = [(mats, last)]
        for _ in range(L):
            mats, last = kernels.extend_words(mats, last, gens, inv_of)
            levels.append((mats, last))
        return levels

    def enumerate_words(self, L: int):
        """Yield every freely reduced word of length <= L exactly once."""
        self._check_budget(L)
        yield Word((), identity(), 0.0)
        k2 = self.letter_count()

        def rec(letters, mat, depth):
            for letter in range(k2):
                if letters and self._signed_to_letter(-letters[-1]) == letter:
                    continue
                nmat = mat * self.letter_matrix(letter)
                nletters = letters + [self.letter_signed(letter)]
                disp = kernels.displacements(
                    np.array([[[nmat.a, nmat.b], [nmat.c, nmat.d]]])
                )[0]
                yield Word(tuple(nletters), nmat, disp)
                if depth < L:
                    yield from rec(nletters, nmat, depth + 1)

        if L >= 1:
            yield from rec([], identity(), 1)

    # -- critical exponent --------------------------------------------------

    def _bowen_root(self, disp):
        lo, hi = 1e-9, 4.0

        def F(s):
            return np.sum(np.exp(-s * disp))

        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if F(mid) > 1.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def estimate_delta(self, L: int, method: str = "bowen"):
        """Estimate the critical exponent; returns (delta, spread)."""
        if L < 4:
            raise ValueError("need L >= 4")
        levels = self.level_matrices(L)
        if method == "bowen":
            s_prev = self._bowen_root(kernels.displacements(levels[L - 1][0]))
            s_last = self._bowen_root(kernels.displacements(levels[L][0]))
            spread = abs(s_last - s_prev)
        elif method == "poincare":
            disp = np.concatenate(
                [kernels.displacements(m) for m, _ in levels[1:]]
            )
            s_last = poincare_exponent(disp)
            disp_prev = np.concatenate(
                [kernels.displacements(m) for m, _ in levels[1:L]]
            )
            spread = abs(s_last - poincare_exponent(disp_prev))
        else:
            raise ValueError(f"unknown method {method!r}")
        if spread > 0.05:
            raise Diverged(f"delta estimate spread {spread:.3f} at depth {L}")
        return s_last, spread

    def delta(self, depth: int = 8) -> float:
        if self._delta is None or self._delta_depth != depth:
            d, _ = self.estimate_delta(depth, "bowen")
            if self.has_cusp and d <= 0.5:
                raise Diverged(
                    f"cusped group must have critical exponent > 1/2, got {d:.3f}"
                )
            self._delta = d
            self._delta_depth = depth
        return self._delta

    # -- limit set -----------------------------------------------------------

    def letter_fixed_point(self, letter: int) -> BoundaryPoint:
        """Attracting fixed point of a letter's matrix."""
        g = self.letter_matrix(letter)
        if abs(abs(g.trace()) - 2.0) <= 1e-12 and abs(g.c) <= 1e-12:
            return INFINITY
        return attracting_fixed_point(g)

    def limit_samples(self, depth: int):
        """One boundary point per length-`depth` cylinder, with orbit
        displacements; returns (points: ndarray with +-inf allowed,
        finite_mask, disps, first_letters)."""
        if depth < 1:
            raise ValueError("depth must be >= 1")
        levels = self.level_matrices(depth)
        mats, last = levels[depth]
        disps = kernels.displacements(mats)
        fixed = np.empty(self.letter_count())
        fixed_inf = np.zeros(self.letter_count(), dtype=bool)
        for letter in range(self.letter_count()):
            fp = self.letter_fixed_point(letter)
            if fp.is_infinity:
                fixed_inf[letter] = True
                fixed[letter] = np.nan
            else:
                fixed[letter] = fp.value
        a, b = mats[:, 0, 0], mats[:, 0, 1]
        c, d = mats[:, 1, 0], mats[:, 1, 1]
        f = fixed[last]
        inf_in = fixed_inf[last]
        with np.errstate(divide="ignore", invalid="ignore"):
            pts = np.where(inf_in, a / c, (a * f + b) / (c * f + d))
        finite = np.isfinite(pts)
        # level arrays are prefix-major, so first letters form uniform
        # contiguous blocks of (2k-1)^(depth-1) words each
        k2 = self.letter_count()
        block = (k2 - 1) ** (depth - 1)
        firsts = np.repeat(np.arange(k2, dtype=np.int64), block)
        return pts, finite, disps, firsts

    def sample_limit_set(self, depth: int):
        pts, finite, _, _ = self.limit_samples(depth)
        out = []
        for p, fin in zip(pts, finite):
            out.append(BoundaryPoint(float(p)) if fin else INFINITY)
        return out


def attracting_fixed_point(g: GroupElement) -> BoundaryPoint:
    """Attracting fixed point of a hyperbolic element."""
    tr = g.trace()
    if abs(abs(tr) - 2.0) <= 1e-9:
        raise ParabolicWord("element is parabolic")
    if abs(tr) < 2.0:
        raise ValueError("element is elliptic; no boundary fixed point")
    if abs(g.c) <= 1e-14:
        # fixed points: oo and b/(d-a); oo attracting iff |a| > |d|
        if abs(g.a) > abs(g.d):
            return INFINITY
        return BoundaryPoint(g.b / (g.d - g.a))
    disc = math.sqrt(tr * tr - 4.0)
    u1 = ((g.a - g.d) + disc) / (2.0 * g.c)
    u2 = ((g.a - g.d) - disc) / (2.0 * g.c)
    # attracting fixed point has |c u + d| > 1
    return BoundaryPoint(u1 if abs(g.c * u1 + g.d) > 1.0 else u2)


def repelling_fixed_point(g: GroupElement) -> BoundaryPoint:
    return attracting_fixed_point(g.inverse())


def radial_frame(group: FuchsianGroup, word: Word, t: float = 0.0) -> GroupElement:
    """A frame whose forward endpoint is the attracting fixed point of a
    cyclically reduced hyperbolic word; t slides along the axis."""
    if not word.letters:
        raise ValueError("word must be nonempty")
    g = word.matrix
    plus = attracting_fixed_point(g)
    minus = repelling_fixed_point(g)
    from .moebius import HopfCoordinates, hopf_inverse

    return hopf_inverse(HopfCoordinates(plus, minus, t))


def poincare_exponent(disp, r_lo=None, r_hi=None):
    """Slope of log N(R) against R for the orbit counting function."""
    disp = np.sort(np.asarray(disp))
    if r_hi is None:
        r_hi = disp[-1] * 0.9
    if r_lo is None:
        r_lo = max(disp[0] + 1e-6, 0.3 * r_hi)
    rs = np.linspace(r_lo, r_hi, 12)
    counts = np.searchsorted(disp, rs, side="right").astype(float)
    counts = np.maximum(counts, 1.0)
    slope, _ = np.polyfit(rs, np.log(counts), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# config files


def parse_group_config(text: str):
    """Parse the line-based `key = value` group config.

    Returns (PairedDisks, options dict, raw echo lines).
    """
    pairs = []
    options = {}
    raw = []
    bumps = []
    for line in text.splitlines():
        raw.append(line)
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"bad config line: {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key == "pair":
            c, r, c2, r2 = (float(v) for v in value.split())
            pairs.append([c, r, c2, r2, False])
        elif key == "parabolic":
            if not pairs:
                raise ValueError("parabolic flag before any pair")
            pairs[-1][4] = value.lower() == "true"
        elif key == "bump":
            bumps.append([float(v) for v in value.split()])
        else:
            options[key] = value
    if not pairs:
        raise ValueError("config defines no pairs")
    disks = PairedDisks(tuple(DiskPair(*p) for p in pairs))
    options["bumps"] = bumps
    return disks, options, raw


def build_group(disks: PairedDisks, **kw) -> FuchsianGroup:
    return FuchsianGroup(disks, **kw)
