"""Radial functions on a ball together with their derivative."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._quad import panel_rule


@dataclass(frozen=True)
class NodalData:
    """Nodal structure of a profile.

    ``r_i`` are the interior zeros, ``M`` the sup of |u| on each nodal zone
    (zone 1 first).  ``M_lambda`` is the sup over the annulus (r_1, 1) and
    ``s_lambda`` the first critical radius after r_1; both are NaN for m=1.
    """

    r_i: np.ndarray
    s_lambda: float
    M: np.ndarray
    M_lambda: float
    crits: np.ndarray

    @property
    def r_lambda(self) -> float:
        return float(self.r_i[0]) if self.r_i.size else float("nan")


StateFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function u(|x|) on [0, r_end] with u' available.

    ``r``, ``u``, ``up`` form a sampling grid.  When ``source`` is given it
    evaluates (u, u') exactly at arbitrary radii; otherwise a cubic Hermite
    interpolant of the grid is used.  ``breaks`` are quadrature panel edges
    (defaults to the grid).
    """

    N: int
    lam: float
    r: np.ndarray
    u: np.ndarray
    up: np.ndarray
    zones: int = 1
    zeros: np.ndarray = field(default_factory=lambda: np.empty(0))
    crits: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    nodal: NodalData | None = None
    source: StateFn | None = field(default=None, repr=False)
    breaks: np.ndarray | None = field(default=None, repr=False)

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    def state(self, r) -> tuple[np.ndarray, np.ndarray]:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.source is not None:
            return self.source(r)
        spl = CubicHermiteSpline(self.r, self.u, self.up)
        return spl(r), spl(r, 1)

    def __call__(self, r):
        return self.state(r)[0]

    def derivative(self, r):
        return self.state(r)[1]

    def quadrature_rule(self, order: int = 10, lo: float = 0.0, hi: float | None = None):
        hi = self.r_end if hi is None else hi
        edges = self.r if self.breaks is None else self.breaks
        extra = [lo, hi]
        if self.zeros.size:
            extra += list(self.zeros)
        edges = np.concatenate((edges, extra))
        edges = edges[(edges >= lo) & (edges <= hi)]
        return panel_rule(edges, order)

    def integrate(self, fn, order: int = 10, lo: float = 0.0, hi: float | None = None) -> float:
        """int fn(r, u, u') dr over [lo, hi] with the profile's panel layout."""
        s, w = self.quadrature_rule(order, lo, hi)
        u, up = self.state(s)
        return float(np.sum(w * fn(s, u, up)))

    def scaled(self, factor: float) -> "RadialProfile":
        """The profile multiplied by a constant."""
        src = self.source
        new_src = None
        if src is not None:
            def new_src(r, _s=src, _c=factor):
                u, up = _s(r)
                return _c * u, _c * up
        return RadialProfile(
            N=self.N, lam=self.lam, r=self.r, u=factor * self.u, up=factor * self.up,
            zones=self.zones, zeros=self.zeros,
            crits=np.column_stack((self.crits[:, 0], factor * self.crits[:, 1]))
            if self.crits.size else self.crits,
            nodal=None, source=new_src, breaks=self.breaks,
        )

    @classmethod
    def from_function(cls, N: int, lam: float, fn, dfn, breaks, zones: int = 1):
        """Profile defined by closed-form callables for u and u'."""
        breaks = np.asarray(breaks, dtype=float)

        def src(r):
            return np.asarray(fn(r), dtype=float), np.asarray(dfn(r), dtype=float)

        u, up = src(breaks)
        return cls(N=N, lam=lam, r=breaks, u=u, up=up, zones=zones, source=src, breaks=breaks)
