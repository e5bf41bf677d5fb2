"""Radial spectral data of the unit ball.

Eigenvalues are squared Bessel zeros, mu_h = j_{nu,h}^2 with nu = N/2 - 1.
Eigenfunctions are normalized by psi_h(0) = -1.  Also provides the radial
Green functions of -Laplacian - pi^2/4 (N=3) and of -Laplacian (N>=4) with
pole at the center, and the Sobolev quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DegenerateProfile, DomainError, UnsupportedOrder
from .profile import RadialProfile

SUPPORTED_ORDERS = (0.5, 1.0, 1.5, 2.0)


def order(N: int) -> float:
    return N / 2.0 - 1.0


def sigma(N: int) -> float:
    """Surface measure of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def ball_volume(N: int) -> float:
    return sigma(N) / N


def bessel_j(nu: float, x):
    """J_nu(x).  Closed trigonometric forms for nu = 1/2, 3/2."""
    x = np.asarray(x, dtype=float)
    if nu == 0.5:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x == 0, 0.0, np.sqrt(2 / (np.pi * x)) * np.sin(x))
    if nu == 1.5:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sqrt(2 / (np.pi * x)) * (np.sin(x) / x - np.cos(x))
        return np.where(x == 0, 0.0, val)
    return special.jv(nu, x)


def _reduced_series(nu: float, x):
    """J_nu(x) / x^nu by its power series; accurate for |x| < 2."""
    x = np.asarray(x, dtype=float)
    q = -(x / 2) ** 2
    term = np.full_like(x, 1.0 / (2**nu * math.gamma(nu + 1)))
    total = term.copy()
    for j in range(1, 30):
        term = term * q / (j * (j + nu))
        total = total + term
    return total


def reduced_bessel(nu: float, x):
    """J_nu(x)/x^nu, finite at x = 0."""
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x)
    small = np.abs(flat) < 1.0
    out = np.empty_like(flat)
    out[small] = _reduced_series(nu, flat[small])
    xs = flat[~small]
    out[~small] = bessel_j(nu, xs) / xs**nu
    return out.reshape(x.shape)


@lru_cache(maxsize=None)
def bessel_zero(nu: float, h: int) -> float:
    """h-th positive zero of J_nu for nu in {1/2, 1, 3/2, 2}."""
    nu = float(nu)
    if nu not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"order {nu} not in {SUPPORTED_ORDERS}")
    if h < 1:
        raise ValueError("h must be a positive integer")
    if nu == 0.5:
        return h * math.pi
    if nu == 1.5:
        # tan x = x has exactly one root in (h pi, h pi + pi/2)
        return brentq(lambda x: math.sin(x) - x * math.cos(x),
                      h * math.pi + 1e-9, h * math.pi + math.pi / 2 - 1e-12,
                      xtol=1e-300, rtol=1e-15)
    # McMahon's expansion brackets the zero to well within half a spacing
    beta = (h + nu / 2 - 0.25) * math.pi
    m4 = 4 * nu * nu
    guess = beta - (m4 - 1) / (8 * beta) - 4 * (m4 - 1) * (7 * m4 - 31) / (3 * (8 * beta) ** 3)
    lo, hi = guess - 0.5, guess + 0.5

    def j(x):
        return float(special.jv(nu, x))

    return brentq(j, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=200)


def mu(N: int, h: int) -> float:
    """h-th radial Dirichlet eigenvalue of -Laplacian on the unit ball in R^N."""
    if N not in (3, 4, 5, 6):
        raise ValueError(f"N must be in 3..6, got {N}")
    return bessel_zero(order(N), h) ** 2


@dataclass(frozen=True)
class SpectralBasis:
    N: int
    mus: tuple[float, ...]

    @property
    def order(self) -> float:
        return order(self.N)


def basis(N: int, count: int) -> SpectralBasis:
    return SpectralBasis(N=N, mus=tuple(mu(N, h) for h in range(1, count + 1)))


def psi(N: int, h: int, r):
    """Radial eigenfunction psi_h on [0, 1] with psi_h(0) = -1 and psi_h(1) = 0."""
    r = np.asarray(r, dtype=float)
    nu = order(N)
    k = bessel_zero(nu, h)
    c0 = reduced_bessel(nu, np.zeros(1))[0]
    out = np.where(r == 1.0, 0.0, -reduced_bessel(nu, k * r) / c0)
    return float(out) if out.ndim == 0 else out


def psi_prime(N: int, h: int, r):
    """d psi_h / dr using (J_nu/x^nu)' = -x J_{nu+1}/x^{nu+1}."""
    r = np.asarray(r, dtype=float)
    nu = order(N)
    k = bessel_zero(nu, h)
    c0 = reduced_bessel(nu, np.zeros(1))[0]
    x = k * r
    return k * x * reduced_bessel(nu + 1, x) / c0


def psi_zeros(N: int, h: int) -> np.ndarray:
    """Interior zeros of psi_h in (0, 1)."""
    nu = order(N)
    kh = bessel_zero(nu, h)
    return np.array([bessel_zero(nu, i) / kh for i in range(1, h)])


def psi_integral(N: int, h: int, p: float, w: int) -> float:
    """int_0^1 r^w |psi_h(r)|^p dr by adaptive Gauss-Kronrod quadrature."""
    if p == 0:
        return 1.0 / (w + 1)
    pts = list(psi_zeros(N, h)) or None

    def integrand(r):
        return r**w * abs(psi(N, h, r)) ** p

    val, _ = quad(integrand, 0.0, 1.0, points=pts, epsabs=1e-13, epsrel=1e-13, limit=400)
    return float(val)


def green_V(r):
    """Radial Green function of -Laplacian - pi^2/4 on the unit ball in R^3, pole at 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("green_V is singular at r = 0")
    return np.cos(np.pi * r / 2) / (4 * np.pi * r)


def green_V_prime(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("green_V is singular at r = 0")
    return -np.sin(np.pi * r / 2) / (8 * r) - np.cos(np.pi * r / 2) / (4 * np.pi * r**2)


def green_G(N: int, r):
    """Radial Green function of -Laplacian on the unit ball in R^N (N >= 3), pole at 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("green_G is singular at r = 0")
    return (r ** (2 - N) - 1) / ((N - 2) * sigma(N))


def green_G_prime(N: int, r):
    r = np.asarray(r, dtype=float)
    return -(r ** (1 - N)) / sigma(N)


def green_H(N: int, r):
    """Regular part of G at the center: identically 1 on the unit ball."""
    return np.ones_like(np.asarray(r, dtype=float))


def sobolev_quotient(profile: RadialProfile, order_: int = 12) -> float:
    """(int |grad u|^2 - lam int u^2) / (int |u|^{2N/(N-2)})^{(N-2)/N} on the ball."""
    N, lam = profile.N, profile.lam
    sN = sigma(N)
    crit = 2.0 * N / (N - 2)
    num = sN * profile.integrate(lambda s, u, up: (up * up - lam * u * u) * s ** (N - 1), order_)
    den = sN * profile.integrate(lambda s, u, up: np.abs(u) ** crit * s ** (N - 1), order_)
    if den < 1e-30:
        raise DegenerateProfile("critical-norm integral below 1e-30")
    return num / den ** ((N - 2) / N)
