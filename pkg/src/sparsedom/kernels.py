"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The two inner loops that dominate every stopping-time run are

* accumulating a "square profile" sum(v_I * 1_I(x) / |I|) over the dyadic
  subtree of a node, and
* integrating |f| against the localization weight chi_I^M for every
  interval of one depth.

Both carry an ``@njit`` implementation and an equivalent vectorized numpy
one.  The backend is picked once at import time from the environment
variable ``SPARSEDOM_BACKEND`` (``numba`` or ``numpy``; default is numba
when importable).  ``benchmarks/bench_kernels.py`` times the two paths
against each other.

Interval-indexed data lives in flat "heap" arrays: the node at (depth d,
index i) sits at position ``(1 << d) + i``, so an array of length 2**J
covers depths 0 .. J-1 (entry 0 unused).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "subtree_profile",
    "chi_sums_depth",
    "interval_sums",
    "heap_subtree_sums",
]


def _subtree_profile_np(vals, J, d0, i0):
    n = 1 << (J - d0)
    out = np.zeros(n)
    for d in range(d0, J):
        base = 1 << d
        start = i0 << (d - d0)
        cnt = 1 << (d - d0)
        seg = 1 << (J - d)
        row = vals[base + start : base + start + cnt]
        if np.any(row):
            out += np.repeat(row * float(1 << d), seg)
    return out


def _chi_sums_depth_np(absf, J, d, M):
    n = absf.shape[0]
    cnt = 1 << d
    B = 1 << (J - d)
    centers = np.arange(n) + 0.5
    out = np.empty(cnt)
    for i in range(cnt):
        lo = i * B
        u = np.maximum(0.0, np.maximum(lo - centers, centers - (lo + B))) / B
        out[i] = np.dot(absf, (1.0 + u) ** (-float(M)))
    return out / n


BACKEND = "numpy"
_requested = os.environ.get("SPARSEDOM_BACKEND", "").strip().lower()
if _requested not in ("", "numpy", "numba"):
    raise RuntimeError(f"SPARSEDOM_BACKEND must be 'numpy' or 'numba', got {_requested!r}")

if _requested != "numpy":
    try:
        from numba import njit
    except ImportError:
        if _requested == "numba":
            raise
        njit = None
    if njit is not None:
        @njit(cache=True)
        def _subtree_profile_nb(vals, J, d0, i0):  # pragma: no cover - timed via tests
            n = 1 << (J - d0)
            out = np.zeros(n)
            for d in range(d0, J):
                base = 1 << d
                start = i0 << (d - d0)
                cnt = 1 << (d - d0)
                seg = 1 << (J - d)
                scale = float(1 << d)
                for t in range(cnt):
                    v = vals[base + start + t]
                    if v != 0.0:
                        add = v * scale
                        c0 = t * seg
                        for c in range(c0, c0 + seg):
                            out[c] += add
            return out

        @njit(cache=True)
        def _chi_sums_depth_nb(absf, J, d, M):  # pragma: no cover
            n = absf.shape[0]
            cnt = 1 << d
            B = 1 << (J - d)
            out = np.empty(cnt)
            for i in range(cnt):
                lo = float(i * B)
                hi = lo + B
                s = 0.0
                for c in range(n):
                    x = c + 0.5
                    if x < lo:
                        u = (lo - x) / B
                    elif x > hi:
                        u = (x - hi) / B
                    else:
                        s += absf[c]
                        continue
                    base = 1.0 / (1.0 + u)
                    w = 1.0
                    m = M
                    while m > 0:        # integer power by squaring
                        if m & 1:
                            w *= base
                        base *= base
                        m >>= 1
                    s += absf[c] * w
                out[i] = s / n
            return out

        BACKEND = "numba"

if BACKEND == "numba":
    subtree_profile = _subtree_profile_nb
    chi_sums_depth = _chi_sums_depth_nb
else:
    subtree_profile = _subtree_profile_np
    chi_sums_depth = _chi_sums_depth_np


def interval_sums(values):
    """Heap of plain cell sums over every dyadic interval, depths 0..J.

    Entry ``(1 << d) + i`` holds sum(values on interval (d, i)); the heap has
    length 2**(J+1).  Integrals are these sums times 2**-J.
    """
    n = values.shape[0]
    J = n.bit_length() - 1
    heap = np.empty(2 * n)
    heap[n:] = values
    for d in range(J - 1, -1, -1):
        lo = 1 << d
        below = heap[2 * lo : 4 * lo]
        heap[lo : 2 * lo] = below[0::2] + below[1::2]
    return heap


def heap_subtree_sums(vals, J):
    """Accumulate vals over dyadic subtrees: out[node] = sum over I <= node.

    ``vals`` is a heap array of length 2**J (depths 0..J-1, entry 0 unused).
    """
    out = vals.copy()
    for d in range(J - 2, -1, -1):
        lo = 1 << d
        below = out[2 * lo : 4 * lo]
        out[lo : 2 * lo] += below[0::2] + below[1::2]
    return out
