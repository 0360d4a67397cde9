"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set HOROLAB_NO_NUMBA=1 to force the numpy implementations (or to run on a
machine without numba).  Both paths compute identical quantities; the
benchmark in benchmarks/bench_kernels.py compares them.
"""

from __future__ import annotations

import math
import os

import numpy as np

USE_NUMBA = os.environ.get("HOROLAB_NO_NUMBA", "0") != "1"
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

_THREADS = os.environ.get("HOROLAB_THREADS")
if _THREADS:
    # cap parallelism for reproducible timings on shared machines
    n_threads = max(1, int(_THREADS))
    if USE_NUMBA:
        import numba

        numba.set_num_threads(min(n_threads, numba.config.NUMBA_NUM_THREADS))

__all__ = [
    "USE_NUMBA",
    "extend_words",
    "displacements",
    "eigenfunction_sums",
    "eigenfunction_grid",
]


# ---------------------------------------------------------------------------
# free-group word enumeration: one level of extension


def _extend_words_np(mats, last, gens, inv_of):
    # prefix-major order, matching the numba path
    n_words = mats.shape[0]
    k2 = gens.shape[0]
    prod = np.einsum("mij,ljk->mlik", mats, gens)
    letters = np.broadcast_to(np.arange(k2, dtype=np.int64), (n_words, k2))
    keep = np.ones((n_words, k2), dtype=bool)
    has_last = last >= 0
    keep[np.nonzero(has_last)[0], inv_of[last[has_last]]] = False
    return prod[keep], letters[keep]


def _displacements_np(mats):
    sq = mats.reshape(mats.shape[0], 4)
    cosh_d = 0.5 * np.einsum("ij,ij->i", sq, sq)
    return np.arccosh(np.maximum(cosh_d, 1.0))


if USE_NUMBA:

    @njit(cache=True)
    def _extend_words_nb(mats, last, gens, inv_of):
        n_words = mats.shape[0]
        k2 = gens.shape[0]
        total = 0
        for i in range(n_words):
            total += k2 - 1 if last[i] >= 0 else k2
        out_m = np.empty((total, 2, 2), dtype=np.float64)
        out_l = np.empty(total, dtype=np.int64)
        pos = 0
        for i in range(n_words):
            a, b = mats[i, 0, 0], mats[i, 0, 1]
            c, d = mats[i, 1, 0], mats[i, 1, 1]
            for letter in range(k2):
                if last[i] >= 0 and letter == inv_of[last[i]]:
                    continue
                ga, gb = gens[letter, 0, 0], gens[letter, 0, 1]
                gc, gd = gens[letter, 1, 0], gens[letter, 1, 1]
                out_m[pos, 0, 0] = a * ga + b * gc
                out_m[pos, 0, 1] = a * gb + b * gd
                out_m[pos, 1, 0] = c * ga + d * gc
                out_m[pos, 1, 1] = c * gb + d * gd
                out_l[pos] = letter
                pos += 1
        return out_m[:pos], out_l[:pos]

    @njit(cache=True)
    def _displacements_nb(mats):
        n = mats.shape[0]
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            q = 0.5 * (
                mats[i, 0, 0] ** 2
                + mats[i, 0, 1] ** 2
                + mats[i, 1, 0] ** 2
                + mats[i, 1, 1] ** 2
            )
            if q < 1.0:
                q = 1.0
            out[i] = math.acosh(q)
        return out


def extend_words(mats, last, gens, inv_of):
    """Extend freely reduced words by one letter on the right.

    mats: (M, 2, 2) word matrices; last: (M,) last-letter index (-1 for the
    identity); gens: (2k, 2, 2) generator matrices; inv_of: (2k,) index of
    each letter's inverse.  Returns (new_mats, new_last).
    """
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    gens = np.ascontiguousarray(gens, dtype=np.float64)
    last = np.asarray(last, dtype=np.int64)
    inv_of = np.asarray(inv_of, dtype=np.int64)
    if USE_NUMBA:
        return _extend_words_nb(mats, last, gens, inv_of)
    return _extend_words_np(mats, last, gens, inv_of)


def displacements(mats):
    """Hyperbolic displacement dist(g.i, i) for a batch of matrices."""
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    if USE_NUMBA:
        return _displacements_nb(mats)
    return _displacements_np(mats)


# ---------------------------------------------------------------------------
# atomic eigenfunction sums


def _eig_sums_np(u, w, x, y, delta, n):
    du = x - u
    q = ((u * u + 1.0) * y / (du * du + y * y)) ** delta
    if n == 0:
        return complex(np.dot(w, q))
    phase = (du - 1j * y) / (du + 1j * y)
    return complex(np.sum(w * q * phase**n))


if USE_NUMBA:

    @njit(cache=True)
    def _eig_sums_nb(u, w, x, y, delta, n):
        total = 0.0 + 0.0j
        for j in range(u.shape[0]):
            du = x - u[j]
            q = ((u[j] * u[j] + 1.0) * y / (du * du + y * y)) ** delta
            if n == 0:
                total += w[j] * q
            else:
                base = (du - 1j * y) / (du + 1j * y)
                p = 1.0 + 0.0j
                m = n if n > 0 else -n
                for _ in range(m):
                    p *= base
                if n < 0:
                    p = p.conjugate() / (p.real**2 + p.imag**2)
                total += w[j] * q * p
        return total

    @njit(cache=True)
    def _eig_grid_nb(u, w, xs, ys, delta, n, out):
        for i in range(xs.shape[0]):
            out[i] = _eig_sums_nb(u, w, xs[i], ys[i], delta, n)


def eigenfunction_sums(u, w, x, y, delta, n=0):
    """Sum_j w_j ((u_j^2+1)y / ((x-u_j)^2+y^2))^delta * phase^n (no c_n)."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if USE_NUMBA:
        return _eig_sums_nb(u, w, float(x), float(y), float(delta), int(n))
    return _eig_sums_np(u, w, float(x), float(y), float(delta), int(n))


def eigenfunction_grid(u, w, xs, ys, delta, n=0):
    """Vector of atomic eigenfunction sums at many plane points."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    out = np.empty(xs.shape[0], dtype=np.complex128)
    if USE_NUMBA:
        _eig_grid_nb(u, w, xs, ys, float(delta), int(n), out)
        return out
    for i in range(xs.shape[0]):
        out[i] = _eig_sums_np(u, w, xs[i], ys[i], delta, n)
    return out
