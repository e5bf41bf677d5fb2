"""Singular radial initial value problem with zero and critical-point events.

The equation is ``u'' + (N-1)/r u' + |u|^{4/(N-2)} u + lam u = 0`` with
``u(0) = a`` and ``u'(0) = 0``.  Integration starts slightly off the origin
from a quartic Taylor polynomial and continues with an adaptive
Dormand-Prince 5(4) scheme.  Events are located by Brent's method on the
single-step continuation from the last accepted node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from ._quad import panel_rule
from .errors import NonFinite, RangeError, StructureViolation, TooFewZeros

GUARD = 1e150
# Local error target relative to the requested tolerance; the accumulated
# defect over a few dozen steps then stays within the requested tolerance.
LOCAL_TOL_FACTOR = 0.1
DIMENSIONS = (3, 4, 5, 6)


def exponent(N: int) -> float:
    """p - 1 = 4/(N-2), the power in |u|^{p-1} u."""
    return 4.0 / (N - 2)


def f(u, N: int):
    u = np.asarray(u, dtype=float)
    return np.abs(u) ** exponent(N) * u


def fprime(u, N: int):
    u = np.asarray(u, dtype=float)
    return (exponent(N) + 1.0) * np.abs(u) ** exponent(N)


def _fsecond(u: float, N: int) -> float:
    q = exponent(N)
    if u == 0.0:
        return 0.0
    return (q + 1.0) * q * abs(u) ** (q - 1.0) * math.copysign(1.0, u)


@dataclass(frozen=True)
class IvpSpec:
    N: int
    lam: float
    a: float
    r_max: float
    tol_rel: float = 1e-10
    tol_abs: float = 1e-10

    def __post_init__(self):
        if self.N not in DIMENSIONS:
            raise ValueError(f"N must be one of {DIMENSIONS}, got {self.N}")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise ValueError("tolerances must be positive")
        if not (math.isfinite(self.a) and math.isfinite(self.lam)):
            raise ValueError("a and lam must be finite")


@dataclass(frozen=True)
class StopRule:
    """Stop after the ``zeros``-th sign change of u, or at r_max when None."""

    zeros: int | None = None


def start_radius(N: int, lam: float, a: float, tol_abs: float) -> float:
    """Radius where the Taylor start hands over to the integrator.

    The quartic term of the series is kept, and the radius is capped at a
    thousandth of the local length scale so that the sixth-order remainder is
    negligible even when the central value is huge.
    """
    g = float(f(a, N)) + lam * a
    gp = float(fprime(a, N)) + lam
    r = min(1e-6, (tol_abs / (1.0 + abs(float(f(a, N))) + abs(lam * a))) ** 0.25)
    kappa = abs(gp) + (abs(g) / abs(a) if a != 0 else 0.0)
    if kappa > 0:
        r = min(r, 1e-3 / math.sqrt(kappa))
    return r


def taylor_coefficients(N: int, lam: float, a: float, sys: int = K.SYS_BN) -> np.ndarray:
    """Even-power coefficients [c0, c2, c4] for each unknown of the system."""
    g = float(f(a, N)) + lam * a
    gp = float(fprime(a, N)) + lam
    c2 = -g / (2 * N)
    c4 = -gp * c2 / (4 * (N + 2))
    rows = [[a, c2, c4]]
    if sys == K.SYS_LIN:
        q2 = -a / (2 * N)
        q4 = -(gp * q2 + c2) / (4 * (N + 2))
        k2 = -gp / (2 * N)
        k4 = -(gp * k2 + _fsecond(a, N) * c2) / (4 * (N + 2))
        rows += [[0.0, q2, q4], [1.0, k2, k4]]
    return np.array(rows, dtype=float)


def taylor_state(coef: np.ndarray, r) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty((r.size, 2 * coef.shape[0]))
    r2 = r * r
    for j, (c0, c2, c4) in enumerate(coef):
        out[:, 2 * j] = c0 + r2 * (c2 + c4 * r2)
        out[:, 2 * j + 1] = r * (2 * c2 + 4 * c4 * r2)
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted integration nodes plus refined events.

    ``nodes`` starts at 0 and includes the Taylor hand-over radius; ``u`` and
    ``u_prime`` are aligned with it.  ``crits`` has one row (radius, u) per
    interior critical point.
    """

    N: int
    lam: float
    a: float
    tol_rel: float
    tol_abs: float
    sys: int
    r_start: float
    taylor: np.ndarray
    ts: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    zeros: np.ndarray
    crits: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate(([0.0], self.ts))

    @property
    def u(self) -> np.ndarray:
        return np.concatenate(([self.a], self.ys[:, 0]))

    @property
    def u_prime(self) -> np.ndarray:
        return np.concatenate(([0.0], self.ys[:, 1]))

    @property
    def r_end(self) -> float:
        return float(self.ts[-1])

    def evaluate(self, r) -> np.ndarray:
        """Full state at the radii ``r`` (rows), via Taylor or a restarted step."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if r.size and (r.min() < 0 or r.max() > self.r_end * (1 + 1e-14)):
            raise RangeError(f"radius outside [0, {self.r_end}]")
        out = np.empty((r.size, self.ys.shape[1]))
        inner = r < self.r_start
        if inner.any():
            out[inner] = taylor_state(self.taylor, r[inner])
        if (~inner).any():
            rq = np.minimum(r[~inner], self.r_end)
            out[~inner] = K.eval_many(self.sys, float(self.N), self.lam, self.ts, self.ys, rq)
        return out

    def value(self, r):
        return self.evaluate(r)[:, 0]

    def derivative(self, r):
        return self.evaluate(r)[:, 1]

    def quadrature_rule(self, lo: float, hi: float, order: int = 10):
        """Gauss rule on [lo, hi] with panels aligned to the integration nodes."""
        inside = self.ts[(self.ts > lo) & (self.ts < hi)]
        edges = np.concatenate(([lo], inside, [hi]))
        if lo < self.r_start < hi:
            edges = np.append(edges, self.r_start)
        return panel_rule(edges, order)

    def check_structure(self) -> None:
        """Zeros increase strictly and each pair of consecutive zeros
        encloses exactly one critical point; u is monotone before its first zero."""
        z = self.zeros
        if np.any(np.diff(z) <= 0):
            raise StructureViolation("zeros are not strictly increasing")
        c = self.crits[:, 0] if self.crits.size else np.empty(0)
        if z.size == 0:
            if c.size > 1:
                raise StructureViolation("more than one critical point without a zero")
            return
        if np.any(c < z[0]):
            raise StructureViolation("critical point before the first zero")
        for lo, hi in zip(z[:-1], z[1:]):
            cnt = int(np.count_nonzero((c > lo) & (c < hi)))
            if cnt != 1:
                raise StructureViolation(f"{cnt} critical points between zeros {lo} and {hi}")
        if np.count_nonzero(c > z[-1]) > 1:
            raise StructureViolation("more than one critical point after the last zero")


def _refine(sys, N, lam, ts, ys, comp) -> list[tuple[float, np.ndarray]]:
    """Locate sign changes of component ``comp`` between accepted nodes."""
    v = ys[:, comp]
    prev, nxt = v[:-1], v[1:]
    idx = np.nonzero(((prev > 0) & (nxt <= 0)) | ((prev < 0) & (nxt >= 0)))[0]
    found = []
    Nf = float(N)
    for j in idx:
        t0, y0 = ts[j], ys[j]
        if nxt[j] == 0.0:
            found.append((float(ts[j + 1]), ys[j + 1].copy()))
            continue

        def g(x):
            return K.substep(sys, Nf, lam, t0, y0, x - t0)[comp]

        x = brentq(g, t0, ts[j + 1], xtol=1e-300, rtol=1e-15, maxiter=200)
        found.append((x, K.substep(sys, Nf, lam, t0, y0, x - t0)))
    return found


def integrate(
    spec: IvpSpec,
    stop: StopRule | None = None,
    *,
    sys: int = K.SYS_BN,
    r_start: float | None = None,
    max_steps: int = 2_000_000,
) -> Trajectory:
    """Integrate the radial problem described by ``spec`` until ``stop`` fires."""
    stop = stop or StopRule()
    N, lam, a = spec.N, float(spec.lam), float(spec.a)
    with np.errstate(over="ignore", invalid="ignore"):
        central = float(fprime(a, N)) * abs(a)
    if abs(a) > GUARD or not math.isfinite(central):
        raise NonFinite(f"central value a={a} overflows the nonlinearity (N={N})")
    coef = taylor_coefficients(N, lam, a, sys)
    r0 = start_radius(N, lam, a, spec.tol_abs) if r_start is None else float(r_start)
    r0 = min(r0, 0.5 * spec.r_max)
    y0 = taylor_state(coef, r0)[0]
    zero_stop = 0 if stop.zeros is None else int(stop.zeros)
    ts, ys, status, nz = K.integrate_kernel(
        sys, float(N), lam, r0, y0, float(spec.r_max),
        spec.tol_rel * LOCAL_TOL_FACTOR, spec.tol_abs * LOCAL_TOL_FACTOR,
        0.1 * r0, zero_stop, GUARD, max_steps,
    )
    if status in (K.STATUS_OVERFLOW, K.STATUS_STALLED):
        why = "overflow guard" if status == K.STATUS_OVERFLOW else "step size underflow"
        raise NonFinite(f"{why} at r={ts[-1]:.6g} (N={N}, lam={lam}, a={a})")
    if zero_stop and nz < zero_stop:
        raise TooFewZeros(f"found {nz} of {zero_stop} zeros before r_max={spec.r_max}")
    zeros = [z for z, _ in _refine(sys, N, lam, ts, ys, 0)]
    crit_rows = [(c, y[0]) for c, y in _refine(sys, N, lam, ts, ys, 1)]
    traj = Trajectory(
        N=N, lam=lam, a=a, tol_rel=spec.tol_rel, tol_abs=spec.tol_abs, sys=sys,
        r_start=r0, taylor=coef, ts=ts, ys=ys,
        zeros=np.array(zeros, dtype=float),
        crits=np.array(crit_rows, dtype=float).reshape(-1, 2),
    )
    if sys == K.SYS_BN:
        traj.check_structure()
    return traj


def identity_terms(traj: Trajectory, r: float, b: float, order: int = 10):
    """Residual of the integrated equation and the size of its terms.

    The residual is u'(r) - r^{1-N} [ b^{N-1} u'(b) + int_r^b s^{N-1} g(u) ds ]
    with g(u) = f(u) + lam u.  The scale is r^{1-N} times the sum of absolute
    values inside the bracket; it grows like (b/r)^{N-1} when r << b and is
    the natural unit for rounding and truncation errors.
    """
    if not (0 < r <= b <= traj.r_end * (1 + 1e-14)):
        raise RangeError(f"need 0 < r <= b <= {traj.r_end}, got r={r}, b={b}")
    st = traj.evaluate([r, b])
    if r == b:
        return 0.0, float(abs(st[0, 1]))
    N = traj.N
    s, w = traj.quadrature_rule(r, b, order)
    us = traj.value(s)
    g = s ** (N - 1) * (f(us, N) + traj.lam * us)
    bracket = b ** (N - 1) * st[1, 1] + float(np.sum(w * g))
    scale = r ** (1 - N) * (b ** (N - 1) * abs(st[1, 1]) + float(np.sum(w * np.abs(g))))
    return float(st[0, 1] - r ** (1 - N) * bracket), float(scale)


def check_integral_identity(traj: Trajectory, r: float, b: float, order: int = 10) -> float:
    """Signed residual u'(r) - r^{1-N}[b^{N-1}u'(b) + int_r^b s^{N-1}(f(u)+lam u) ds]."""
    return identity_terms(traj, r, b, order)[0]
