"""Dormand-Prince 5(4) kernels for the radial Brezis-Nirenberg ODE.

Two right-hand sides are supported, selected by an integer system code:

* ``SYS_BN`` (dim 2): ``u'' + (N-1)/r u' + f(u) + lam u = 0`` with
  ``f(u) = |u|^{4/(N-2)} u``.
* ``SYS_LIN`` (dim 6): the same equation carried together with the
  linearization ``p'' + (N-1)/r p' + (f'(u) + lam) p = -u`` and its homogeneous
  twin ``h'' + (N-1)/r h' + (f'(u) + lam) h = 0``.

The module is compiled with numba when available. Setting the environment
variable ``BNLAB_DISABLE_NUMBA=1`` runs the very same code as plain Python on
numpy arrays, which is slow but dependency free.
"""

from __future__ import annotations

import math
import os

import numpy as np

SYS_BN = 0
SYS_LIN = 1

STATUS_END = 0
STATUS_ZEROS = 1
STATUS_OVERFLOW = 2
STATUS_STALLED = 3


def _numba_requested() -> bool:
    flag = os.environ.get("BNLAB_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True

    def jit(fn):
        return _njit(cache=True, nogil=True)(fn)

except ImportError:
    HAS_NUMBA = False

    def jit(fn):
        return fn


# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@jit
def nonlin(u, N):
    """f(u) = |u|^{4/(N-2)} u with exact integer powers where possible."""
    if N == 3:
        u2 = u * u
        return u2 * u2 * u
    if N == 4:
        return u * u * u
    if N == 6:
        return abs(u) * u
    return math.copysign(abs(u) ** (7.0 / 3.0), u)


@jit
def dnonlin(u, N):
    """f'(u)."""
    if N == 3:
        u2 = u * u
        return 5.0 * u2 * u2
    if N == 4:
        return 3.0 * u * u
    if N == 6:
        return 2.0 * abs(u)
    return (7.0 / 3.0) * abs(u) ** (4.0 / 3.0)


@jit
def rhs(sys, N, lam, t, y, out):
    damp = (N - 1.0) / t
    u = y[0]
    out[0] = y[1]
    out[1] = -damp * y[1] - nonlin(u, N) - lam * u
    if sys == SYS_LIN:
        q = dnonlin(u, N) + lam
        out[2] = y[3]
        out[3] = -damp * y[3] - q * y[2] - u
        out[4] = y[5]
        out[5] = -damp * y[5] - q * y[4]


@jit
def dp_step(sys, N, lam, t, y, h, k, ytmp, y5, yerr, dy):
    """One Dormand-Prince step; k[0] must already hold rhs(t, y).

    ``dy`` receives the increment itself so callers can add it with
    compensated summation.
    """
    dim = y.shape[0]
    for i in range(dim):
        ytmp[i] = y[i] + h * A21 * k[0, i]
    rhs(sys, N, lam, t + C2 * h, ytmp, k[1])
    for i in range(dim):
        ytmp[i] = y[i] + h * (A31 * k[0, i] + A32 * k[1, i])
    rhs(sys, N, lam, t + C3 * h, ytmp, k[2])
    for i in range(dim):
        ytmp[i] = y[i] + h * (A41 * k[0, i] + A42 * k[1, i] + A43 * k[2, i])
    rhs(sys, N, lam, t + C4 * h, ytmp, k[3])
    for i in range(dim):
        ytmp[i] = y[i] + h * (
            A51 * k[0, i] + A52 * k[1, i] + A53 * k[2, i] + A54 * k[3, i]
        )
    rhs(sys, N, lam, t + C5 * h, ytmp, k[4])
    for i in range(dim):
        ytmp[i] = y[i] + h * (
            A61 * k[0, i] + A62 * k[1, i] + A63 * k[2, i] + A64 * k[3, i] + A65 * k[4, i]
        )
    rhs(sys, N, lam, t + h, ytmp, k[5])
    for i in range(dim):
        dy[i] = h * (
            B1 * k[0, i] + B3 * k[2, i] + B4 * k[3, i] + B5 * k[4, i] + B6 * k[5, i]
        )
        y5[i] = y[i] + dy[i]
    rhs(sys, N, lam, t + h, y5, k[6])
    for i in range(dim):
        yerr[i] = h * (
            E1 * k[0, i]
            + E3 * k[2, i]
            + E4 * k[3, i]
            + E5 * k[4, i]
            + E6 * k[5, i]
            + E7 * k[6, i]
        )


@jit
def integrate_kernel(sys, N, lam, t0, y0, t_end, rtol, atol, h0, zero_stop, guard, max_steps):
    """Adaptive integration from t0 towards t_end.

    Stops early once ``zero_stop`` sign changes of y[0] have been crossed
    (``zero_stop <= 0`` disables this), or when |y[0]| exceeds ``guard``.
    Returns (ts, ys, status, n_sign_changes).
    """
    dim = y0.shape[0]
    cap = 512
    ts = np.empty(cap)
    ys = np.empty((cap, dim))
    ts[0] = t0
    for i in range(dim):
        ys[0, i] = y0[i]
    n = 1
    y = y0.copy()
    t = t0
    h = h0
    k = np.empty((7, dim))
    ytmp = np.empty(dim)
    y5 = np.empty(dim)
    yerr = np.empty(dim)
    dy = np.empty(dim)
    comp = np.zeros(dim)
    rhs(sys, N, lam, t, y, k[0])
    nz = 0
    status = STATUS_STALLED
    while n < max_steps:
        if t + h >= t_end:
            h = t_end - t
        dp_step(sys, N, lam, t, y, h, k, ytmp, y5, yerr, dy)
        err = 0.0
        for i in range(dim):
            sc = atol + rtol * max(abs(y[i]), abs(y5[i]))
            err += (yerr[i] / sc) ** 2
        err = math.sqrt(err / dim)
        if not (err == err) or math.isinf(err):
            h *= 0.2
            if h <= 1e-15 * abs(t):
                break
            continue
        if err <= 1.0:
            tnew = t + h if t + h < t_end else t_end
            landed = False
            if (y[0] > 0.0 and y5[0] < 0.0) or (y[0] < 0.0 and y5[0] > 0.0):
                # f is not smooth at u = 0: shorten the step so that it ends
                # exactly on the zero and the next step starts there.
                tz = _step_zero(sys, N, lam, t, y, tnew - t, y5[0])
                ytmp2 = substep(sys, N, lam, t, y, tz - t)
                for i in range(dim):
                    dy[i] = ytmp2[i] - y[i]
                dy[0] = -y[0]
                tnew = tz
                for i in range(dim):
                    y5[i] = y[i] + dy[i]
                y5[0] = 0.0
                rhs(sys, N, lam, tnew, y5, k[6])
                landed = True
                nz += 1
            elif y[0] != 0.0 and y5[0] == 0.0:
                nz += 1
            if n == cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, dim))
                ts2[:n] = ts[:n]
                ys2[:n] = ys[:n]
                ts = ts2
                ys = ys2
            ts[n] = tnew
            for i in range(dim):
                # Kahan-Babuska update: y + dy with the carried rounding error
                inc = dy[i] + comp[i]
                tot = y[i] + inc
                if abs(y[i]) >= abs(inc):
                    comp[i] = (y[i] - tot) + inc
                else:
                    comp[i] = (inc - tot) + y[i]
                y[i] = tot
                ys[n, i] = tot
                k[0, i] = k[6, i]
            if landed:
                y[0] = 0.0
                ys[n, 0] = 0.0
                comp[0] = 0.0
            n += 1
            t = tnew
            if abs(y[0]) > guard or not math.isfinite(y[0]):
                status = STATUS_OVERFLOW
                break
            if zero_stop > 0 and nz >= zero_stop:
                status = STATUS_ZEROS
                break
            if t >= t_end:
                status = STATUS_END
                break
            if err == 0.0:
                fac = 10.0
            else:
                fac = min(10.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
        if h <= 1e-15 * abs(t):
            break
    return ts[:n].copy(), ys[:n].copy(), status, nz


@jit
def _step_zero(sys, N, lam, t, y, h, u_end):
    """Zero of u inside a step from (t, y) of length h (Illinois regula falsi)."""
    lo, hi = 0.0, h
    flo, fhi = y[0], u_end
    side = 0
    x = hi
    for _ in range(200):
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = substep(sys, N, lam, t, y, x)[0]
        if fx == 0.0:
            break
        if (fx > 0.0) == (flo > 0.0):
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        if hi - lo <= 4e-16 * (abs(t) + hi):
            break
    return t + x


@jit
def substep(sys, N, lam, t, y, h):
    """Fifth-order state at t + h obtained by a single step from (t, y)."""
    dim = y.shape[0]
    out = np.empty(dim)
    if h == 0.0:
        for i in range(dim):
            out[i] = y[i]
        return out
    k = np.empty((7, dim))
    ytmp = np.empty(dim)
    yerr = np.empty(dim)
    dy = np.empty(dim)
    rhs(sys, N, lam, t, y, k[0])
    dp_step(sys, N, lam, t, y, h, k, ytmp, out, yerr, dy)
    return out


@jit
def eval_many(sys, N, lam, ts, ys, rq):
    """Dense evaluation: restart one step from the last node below each query."""
    m = rq.shape[0]
    dim = ys.shape[1]
    out = np.empty((m, dim))
    n = ts.shape[0]
    for j in range(m):
        idx = np.searchsorted(ts, rq[j], side="right") - 1
        if idx < 0:
            idx = 0
        if idx > n - 1:
            idx = n - 1
        res = substep(sys, N, lam, ts[idx], ys[idx], rq[j] - ts[idx])
        for i in range(dim):
            out[j, i] = res[i]
    return out
