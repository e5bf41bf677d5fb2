"""Linearized problem at the N = 6 limit profile.

u_bar is the limit profile with the sign chosen so that u_bar(0) =
+lambda_bar/2.  At lam = lambda_bar it is nondegenerate, so
-Lap v - (2|u_bar| + lambda_bar) v = u_bar with v = 0 on the sphere has a
unique radial solution v0_bar.  It is built from two regular IVP solutions
integrated together with u_bar: p (forced, p(0) = 0) and h (homogeneous,
h(0) = 1), as v0_bar = p + c h with c = -p(1)/h(1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .critical import CriticalData
from .errors import Degenerate, Indeterminate
from .ivp import IvpSpec, Trajectory, integrate
from .profile import RadialProfile

DEGENERACY_FLOOR = 1e-6
SIGN_FLOOR = 1e-6


def _component_profile(traj: Trajectory, comps, weights, zones: int = 1) -> RadialProfile:
    """Linear combination of trajectory components as a profile on [0, r_end]."""
    nodes = traj.nodes

    def source(r, _t=traj, _c=tuple(comps), _w=tuple(weights)):
        y = _t.evaluate(np.asarray(r))
        u = sum(w * y[:, 2 * c] for c, w in zip(_c, _w))
        up = sum(w * y[:, 2 * c + 1] for c, w in zip(_c, _w))
        return u, up

    u, up = source(nodes)
    return RadialProfile(N=traj.N, lam=traj.lam, r=nodes, u=u, up=up, zones=zones,
                         source=source, breaks=nodes)


@dataclass(frozen=True, eq=False)
class LinearizedBundle:
    lambda_bar: float
    u_bar: RadialProfile = field(repr=False)
    v0_bar: RadialProfile = field(repr=False)
    p: RadialProfile = field(repr=False)
    h: RadialProfile = field(repr=False)
    c: float
    nondegeneracy_margin: float
    traj: Trajectory = field(repr=False)

    @property
    def v0_bar_0(self) -> float:
        return float(self.v0_bar.u[0])

    @property
    def sign_selector(self) -> float:
        """1 - 2 v0_bar(0)."""
        return 1.0 - 2.0 * self.v0_bar_0


def solve_v0(critical: CriticalData, tol: float = 1e-12, source_scale: float = 1.0) -> LinearizedBundle:
    """v0_bar for the forcing ``source_scale * u_bar``.

    The forced equation is linear in its source, so only p is rescaled.
    """
    if critical.N != 6:
        raise ValueError("the linearized solve is defined for N = 6")
    lb = critical.lambda_bar
    traj = integrate(IvpSpec(6, lb, lb / 2, 1.0, tol, tol), sys=K.SYS_LIN)
    y1 = traj.evaluate([1.0])[0]
    hs = np.abs(traj.ys[:, 4])
    margin = abs(y1[4]) / max(float(hs.max()), 1.0)
    if margin < DEGENERACY_FLOOR:
        raise Degenerate(f"h(1)/max|h| = {margin:.3e} below {DEGENERACY_FLOOR}")
    c = -source_scale * y1[2] / y1[4]
    zones = critical.m - 1
    return LinearizedBundle(
        lambda_bar=lb,
        u_bar=_component_profile(traj, [0], [1.0], zones),
        v0_bar=_component_profile(traj, [1, 2], [source_scale, c]),
        p=_component_profile(traj, [1], [source_scale]),
        h=_component_profile(traj, [2], [1.0]),
        c=float(c),
        nondegeneracy_margin=float(margin),
        traj=traj,
    )


@dataclass(frozen=True)
class Z0Data:
    """z0 = (r/2) u_bar' + u_bar - lambda_bar v0_bar and its checks.

    z0 lies in the kernel of the linearized operator and is regular at 0,
    so it must be a multiple of h.
    """

    z0_at_0: float
    z0_at_1: float
    half_du_bar_1: float
    boundary_error: float
    proportionality_error: float
    center_error: float


def z0_crosscheck(bundle: LinearizedBundle, n: int = 2001) -> Z0Data:
    lb = bundle.lambda_bar
    r = np.linspace(0.0, 1.0, n)
    ub, ubp = bundle.u_bar.state(r)
    v0 = bundle.v0_bar(r)
    h = bundle.h(r)
    z0 = 0.5 * r * ubp + ub - lb * v0
    z00, z01 = float(z0[0]), float(z0[-1])
    half = 0.5 * float(ubp[-1])
    scale = float(np.abs(z0).max())
    expect0 = float(ub[0]) * (1.0 - 2.0 * bundle.v0_bar_0)
    return Z0Data(
        z0_at_0=z00,
        z0_at_1=z01,
        half_du_bar_1=half,
        boundary_error=abs(z01 - half) / max(abs(half), 1e-300),
        proportionality_error=float(np.abs(z0 - z00 * h).max()) / scale,
        center_error=abs(z00 - expect0) / max(abs(expect0), 1e-300),
    )


def predict_sign(bundle: LinearizedBundle) -> str:
    """'above' when 1 - 2 v0_bar(0) > 0, 'below' when negative."""
    sel = bundle.sign_selector
    if abs(sel) <= SIGN_FLOOR:
        raise Indeterminate(f"sign selector {sel:.3e} within {SIGN_FLOOR}")
    return "above" if sel > 0 else "below"
