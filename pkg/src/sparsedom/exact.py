"""Exact rational cross-check oracles (Fraction arithmetic, small depths).

These re-derive the core quantities independently of the numpy paths and
are meant for depths J <= 12, where the cell counts stay small.  Tests use
them to pin float results against exact values.
"""

from __future__ import annotations

from fractions import Fraction

from .dyadic import DyadicInterval, Signal

__all__ = [
    "exact_average", "exact_oscillation", "exact_weak_l1",
    "exact_carleson_constant", "exact_local_mean_oscillation",
]


def _cells(f: Signal, I: DyadicInterval):
    lo, hi = I.cell_range(f.depth_J)
    return [Fraction(v) for v in f.values[lo:hi]]


def exact_average(f: Signal, I: DyadicInterval) -> Fraction:
    vals = _cells(f, I)
    return sum(vals, Fraction(0)) / len(vals)


def exact_oscillation(f: Signal, I: DyadicInterval) -> Fraction:
    vals = _cells(f, I)
    m = sum(vals, Fraction(0)) / len(vals)
    return sum((abs(v - m) for v in vals), Fraction(0)) / len(vals)


def exact_weak_l1(f: Signal, I: DyadicInterval | None = None) -> Fraction:
    I = I or DyadicInterval(0, 0)
    vals = sorted((abs(Fraction(v)) for v in _cells(f, I)), reverse=True)
    dx = Fraction(1, f.n_cells)
    return max((v * (k + 1) * dx for k, v in enumerate(vals)), default=Fraction(0))


def exact_carleson_constant(intervals) -> Fraction:
    members = list(intervals)
    if not members:
        return Fraction(0)
    best = Fraction(0)
    for Q in members:
        packed = sum((Fraction(1, 1 << P.depth) for P in members if Q.contains(P)),
                     Fraction(0))
        best = max(best, packed * (1 << Q.depth))
    return best


def exact_local_mean_oscillation(f: Signal, I: DyadicInterval, lam: Fraction) -> Fraction:
    """Brute-force scan over cell values and all pairwise midpoints.

    The rearrangement value c -> ((f - c) 1_I)^*(lam |I|) is piecewise
    linear with breakpoints exactly at the data values and the pairwise
    midpoints, so the scan hits the true infimum.
    """
    vals = _cells(f, I)
    m = len(vals)
    k = int(lam * m)  # floor
    candidates = set(vals)
    for i in range(m):
        for j in range(i + 1, m):
            candidates.add((vals[i] + vals[j]) / 2)
    best = None
    for c in candidates:
        dist = sorted((abs(v - c) for v in vals), reverse=True)
        val = dist[k] if k < m else Fraction(0)
        if best is None or val < best:
            best = val
    return best
