"""Concentration values lambda_bar(N, m) and the associated limit profiles.

For N = 6 the limit profile solves the overdetermined problem
-Lap u = |u| u + lam u in B, u = 0 on the sphere, u(0) = -lam/2, with m-1
nodal zones.  Under v(r) = s^2 u(s r) (which maps lam to s^2 lam) the
constraint u(0) = -lam/2 is invariant, so a single IVP shot at lam0 with
central value -lam0/2 produces it: the (m-1)-th zero R gives
lambda_bar = lam0 R^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .branch import analyze_nodal, scaled_profile, _with_nodal
from .errors import TooFewZeros
from .ivp import IvpSpec, StopRule, Trajectory, integrate
from .profile import RadialProfile

THETA_BRACKET = (math.pi / 2 + 1e-9, 3 * math.pi / 2 - 1e-9)


@dataclass(frozen=True, eq=False)
class CriticalData:
    N: int
    m: int
    lambda_bar: float
    r_bar: float
    limit_profile: RadialProfile | None = field(default=None, repr=False)
    traj: Trajectory | None = field(default=None, repr=False)


def theta_o() -> float:
    """Root of 1 + theta tan(theta) = 0 in (pi/2, 3pi/2)."""
    from scipy.optimize import brentq

    return brentq(lambda t: math.cos(t) + t * math.sin(t), *THETA_BRACKET,
                  xtol=1e-300, rtol=1e-15)


def annulus_profile_n3(m: int) -> RadialProfile:
    """Normalized N=3 annulus limit w on [1/(2m-1), 1] with min -1."""
    k = (2 * m - 1) * math.pi / 2
    th = theta_o()
    amp = -2 * th / ((2 * m - 1) * math.pi * math.cos(th))

    def w(r):
        r = np.asarray(r, dtype=float)
        return amp * np.cos(k * r) / r

    def dw(r):
        r = np.asarray(r, dtype=float)
        return amp * (-k * np.sin(k * r) / r - np.cos(k * r) / r**2)

    grid = np.linspace(1.0 / (2 * m - 1), 1.0, 401)
    zeros = np.array([(2 * j + 1) / (2 * m - 1) for j in range(1, m - 1)])
    prof = RadialProfile.from_function(3, k * k, w, dw, grid, zones=m - 1)
    return RadialProfile(N=3, lam=k * k, r=prof.r, u=prof.u, up=prof.up, zones=m - 1,
                         zeros=zeros, source=prof.source, breaks=prof.breaks)


def eigen_profile(N: int, h: int) -> RadialProfile:
    grid = np.linspace(0.0, 1.0, 401)
    prof = RadialProfile.from_function(
        N, spectral.mu(N, h),
        lambda r: spectral.psi(N, h, r), lambda r: spectral.psi_prime(N, h, r), grid, zones=h,
    )
    return RadialProfile(N=N, lam=prof.lam, r=prof.r, u=prof.u, up=prof.up, zones=h,
                         zeros=spectral.psi_zeros(N, h), source=prof.source, breaks=prof.breaks)


def shoot_overdetermined(m: int, lam0: float = 1.0, central: float | None = None,
                         tol: float = 1e-12) -> tuple[float, Trajectory]:
    """(lam0 R^2, trajectory) for the N=6 shot with central value ``central``."""
    from .branch import shoot_radius

    c = -lam0 / 2 if central is None else central
    r_max = shoot_radius(6, m - 1) / math.sqrt(lam0)
    traj = integrate(IvpSpec(6, lam0, c, r_max, tol, tol), StopRule(m - 1))
    R = float(traj.zeros[m - 2])
    return lam0 * R * R, traj


def lambda_bar(N: int, m: int, tol: float = 1e-12, lam0: float = 1.0) -> CriticalData:
    """Concentration value and limit profile for m nodal zones (m >= 2)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if N == 3:
        lb = ((2 * m - 1) * math.pi / 2) ** 2
        return CriticalData(3, m, lb, math.pi / (2 * math.sqrt(lb)), annulus_profile_n3(m))
    if N in (4, 5):
        return CriticalData(N, m, spectral.mu(N, m - 1), 0.0, eigen_profile(N, m - 1))
    if N != 6:
        raise ValueError(f"N must be in 3..6, got {N}")
    lb, traj = shoot_overdetermined(m, lam0, tol=tol)
    R = math.sqrt(lb / lam0)
    prof = scaled_profile(traj, R, m - 1)
    prof = _with_nodal(prof, analyze_nodal(prof))
    return CriticalData(6, m, lb, 0.0, prof, traj)


def verify_overdetermined(data: CriticalData, probe: float = 1e-3, tol: float = 1e-12) -> dict:
    """Checks of the N=6 limit profile plus a numerical uniqueness probe.

    Perturbing the central value at lam = 1 by a relative ``probe`` moves
    lam0 R_{m-1}^2 off lambda_bar; both shifts are reported.
    """
    if data.N != 6:
        raise ValueError("only defined for N = 6")
    prof = data.limit_profile
    lb = data.lambda_bar
    end = float(prof([1.0])[0])
    ratio = float(prof.u[0]) / lb
    shifts = []
    for sgn in (-1.0, 1.0):
        try:
            lp, _ = shoot_overdetermined(data.m, 1.0, -0.5 * (1 + sgn * probe), tol)
            shifts.append(lp - lb)
        except TooFewZeros:
            shifts.append(float("inf"))
    return {
        "boundary_value": end,
        "central_ratio": ratio,
        "zones": prof.zones,
        "interior_zeros": int(prof.zeros.size),
        "probe_shifts": shifts,
        "pass": bool(abs(end) < 1e-10 and abs(ratio + 0.5) < 1e-14
                     and prof.zeros.size == data.m - 2
                     and all(abs(s) > 1e-8 for s in shifts)),
    }
