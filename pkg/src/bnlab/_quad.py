"""Composite Gauss-Legendre rules on arbitrary panel edges."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_rule(edges, order: int = 10):
    """Nodes and weights of a composite rule on consecutive panels.

    Duplicate or descending edges are dropped, so callers may pass a union of
    break points without cleaning it up first.
    """
    e = np.unique(np.asarray(edges, dtype=float))
    if e.size < 2:
        return np.empty(0), np.empty(0)
    x, w = _gl(order)
    lo, hi = e[:-1], e[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def geometric_edges(lo: float, hi: float, per_decade: int = 40, start: float = 0.0):
    """Edges from ``start`` to ``hi`` that are geometric above ``lo``."""
    n = max(2, int(np.ceil(np.log10(hi / lo) * per_decade)) + 1)
    g = np.geomspace(lo, hi, n)
    if start < lo:
        g = np.concatenate(([start], g))
    return g
