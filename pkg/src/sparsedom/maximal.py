"""Dyadic maximal operators and the local mean oscillation functional.

Every maximal function here takes the sup over shift-0 dyadic intervals
containing the point (depths 0 .. J), never over general intervals; the
dyadic Hardy-Littlewood operator then has weak (1,1) constant 1, which is
what calibrates the stopping constants downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicInterval, Signal

__all__ = ["MaximalKind", "maximal", "local_mean_oscillation", "DEFAULT_LAMBDA"]

#: default rearrangement level for Lerner decompositions (1-D instance of 2**-(2+n))
DEFAULT_LAMBDA = 0.125


@dataclass(frozen=True)
class MaximalKind:
    """One of the maximal-operator variants; build via the classmethods."""

    name: str
    p: float | None = None
    r: float | None = None
    weight: object = None

    @classmethod
    def hl(cls):
        return cls("hl")

    @classmethod
    def lp(cls, p: float):
        if p <= 0:
            raise ValueError("p must be > 0")
        return cls("lp", p=p)

    @classmethod
    def weighted(cls, weight):
        return cls("weighted", weight=weight)

    @classmethod
    def weighted_lr(cls, r: float, weight):
        if r <= 0:
            raise ValueError("r must be > 0")
        return cls("weighted_lr", r=r, weight=weight)

    @classmethod
    def weak(cls):
        return cls("weak")

    @classmethod
    def sharp(cls):
        return cls("sharp")


def _depth_functional_hl(f, d):
    B = 1 << (f.depth_J - d)
    return np.abs(f.values).reshape(-1, B).sum(axis=1) / B


def _depth_functional_lp(f, d, p):
    B = 1 << (f.depth_J - d)
    return (np.abs(f.values) ** p).reshape(-1, B).mean(axis=1) ** (1.0 / p)


def _depth_functional_weighted(f, d, w):
    B = 1 << (f.depth_J - d)
    num = (np.abs(f.values) * w).reshape(-1, B).sum(axis=1)
    den = w.reshape(-1, B).sum(axis=1)
    return num / den


def _depth_functional_weak(f, d):
    B = 1 << (f.depth_J - d)
    blocks = np.sort(np.abs(f.values).reshape(-1, B), axis=1)[:, ::-1]
    ranks = np.arange(1, B + 1)
    # |I|**-1 sup_lam lam |{x in I : |f| > lam}|
    return np.max(blocks * ranks, axis=1) / B


def _depth_functional_sharp(f, d):
    B = 1 << (f.depth_J - d)
    blocks = f.values.reshape(-1, B)
    means = blocks.mean(axis=1, keepdims=True)
    return np.abs(blocks - means).mean(axis=1)


def maximal(f: Signal, kind: MaximalKind) -> Signal:
    """Pointwise sup over dyadic intervals containing x of the local functional."""
    J = f.depth_J
    if kind.name in ("weighted", "weighted_lr"):
        w = kind.weight.values if hasattr(kind.weight, "values") \
            else np.asarray(kind.weight, float)
        if w.shape != f.values.shape:
            raise ValueError("weight resolution mismatch")
        if np.any(w <= 0):
            raise ValueError("weight must be strictly positive")
    if kind.name == "weighted_lr":
        fr = Signal(np.abs(f.values) ** kind.r)
    out = np.full(f.n_cells, -np.inf)
    for d in range(J + 1):
        if kind.name == "hl":
            per = _depth_functional_hl(f, d)
        elif kind.name == "lp":
            per = _depth_functional_lp(f, d, kind.p)
        elif kind.name == "weighted":
            per = _depth_functional_weighted(f, d, w)
        elif kind.name == "weighted_lr":
            per = _depth_functional_weighted(fr, d, w) ** (1.0 / kind.r)
        elif kind.name == "weak":
            per = _depth_functional_weak(f, d)
        elif kind.name == "sharp":
            per = _depth_functional_sharp(f, d)
        else:
            raise ValueError(f"unknown maximal kind {kind.name!r}")
        np.maximum(out, np.repeat(per, 1 << (J - d)), out=out)
    return Signal(out)


def shortest_window_oscillation(sorted_vals: np.ndarray, k: int) -> float:
    """min over c of the (k+1)-th largest |v - c|, for ascending sorted_vals.

    Equals half the width of the shortest window containing m - k of the
    values; the optimum c is that window's midpoint.
    """
    m = sorted_vals.shape[0]
    keep = m - k
    if keep <= 1:
        return 0.0
    return float(np.min(sorted_vals[keep - 1 :] - sorted_vals[: m - keep + 1])) / 2.0


def local_mean_oscillation(f: Signal, I: DyadicInterval, lam: float) -> float:
    """omega_lam(f; I): the rearrangement of (f - c) 1_I at lam |I|, minimized in c.

    Computed exactly: the rearrangement value is the (k+1)-th largest
    distance |f - c| with k = floor(lam * m), and its infimum over c is the
    shortest-window half-width over the sorted cell values.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    f._check(I)
    lo, hi = I.cell_range(f.depth_J)
    vals = np.sort(f.values[lo:hi])
    k = int(np.floor(lam * vals.shape[0]))
    return shortest_window_oscillation(vals, k)
