"""Bubble ansatz around the N = 6 limit profile and its reduced energy.

W = u_bar + eps v0_bar - PU_delta with delta = |eps| d, where U_delta is the
Aubin-Talenti bubble 24 delta^2 / (delta^2 + r^2)^2 of -Lap U = U^2 in R^6
and PU_delta its projection onto functions vanishing on the unit sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ._quad import panel_rule
from .critical import CriticalData
from .errors import Indeterminate
from .linear6 import SIGN_FLOOR, LinearizedBundle
from .profile import RadialProfile
from .spectral import sigma

ALPHA6 = 24.0
SIGMA6 = math.pi**3
PER_DECADE = 200


@dataclass(frozen=True)
class Bubble:
    delta: float
    alpha6: float = ALPHA6
    sigma6: float = SIGMA6

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        d2 = self.delta**2
        return self.alpha6 * d2 / (d2 + r * r) ** 2

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        d2 = self.delta**2
        return -4.0 * self.alpha6 * d2 * r / (d2 + r * r) ** 3

    def second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        d2 = self.delta**2
        q = d2 + r * r
        return -4.0 * self.alpha6 * d2 * (q - 6.0 * r * r) / q**4

    def kernel(self, r):
        """Z_delta = dU_delta/d delta = 48 delta (r^2 - delta^2)/(delta^2 + r^2)^3."""
        r = np.asarray(r, dtype=float)
        d = self.delta
        return 2 * self.alpha6 * d * (r * r - d * d) / (d * d + r * r) ** 3


def _log_edges(lo: float, hi: float, per_decade: int) -> np.ndarray:
    n = max(2, int(math.ceil(math.log10(hi / lo) * per_decade)) + 1)
    return np.geomspace(lo, hi, n)


def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


@dataclass(frozen=True, eq=False)
class ProjectedBubble:
    """PU_delta from the double-integral solution of the radial Poisson problem,
    PU(r) = int_r^1 s^{-5} I(s) ds with I(s) = int_0^s t^5 U(t)^2 dt.

    Values at the panel edges are stored; anywhere else the partial panel is
    integrated again with nested Gauss rules, so no interpolation error enters.
    ``exact`` is the closed form U - U(1) (constants are harmonic), kept as an
    independent reference.
    """

    delta: float
    edges: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    inner: np.ndarray = field(repr=False)
    order: int = 10

    @property
    def bubble(self) -> Bubble:
        return Bubble(self.delta)

    def _inner(self, a, b):
        """int_a^b t^5 U^2 dt, elementwise."""
        xg, wg = _gauss(self.order)
        h = 0.5 * (b - a)[..., None]
        t = 0.5 * (b + a)[..., None] + h * xg
        return np.sum(h * wg * t**5 * self.bubble(t) ** 2, axis=-1)

    def _outer(self, a, b, I_a):
        """int_a^b s^{-5} I(s) ds given I(a), elementwise; a > 0 or I_a = 0."""
        xg, wg = _gauss(self.order)
        h = 0.5 * (b - a)[..., None]
        s = 0.5 * (b + a)[..., None] + h * xg
        I_s = I_a[..., None] + self._inner(np.broadcast_to(a[..., None], s.shape), s)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(s > 0, I_s / s**5, 0.0)
        return np.sum(h * wg * g, axis=-1)

    def state(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if r.size and (r.min() < 0 or r.max() > 1.0):
            raise ValueError("radius outside [0, 1]")
        e = self.edges
        k = np.clip(np.searchsorted(e, r, side="right") - 1, 0, e.size - 2)
        lo = e[k]
        I_r = self.inner[k] + self._inner(lo, r)
        val = self.values[k] - self._outer(lo, r, self.inner[k])
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(r > 0, -I_r / r**5, 0.0)
        return val, slope

    def __call__(self, r):
        return self.state(r)[0]

    def exact(self, r):
        b = self.bubble
        return b(r) - b(1.0)

    def kernel(self, r):
        return self.bubble.kernel(r)

    def projected_kernel(self, r):
        """PZ_delta = Z_delta - Z_delta(1)."""
        b = self.bubble
        return b.kernel(r) - b.kernel(1.0)

    def profile(self) -> RadialProfile:
        u, up = self.state(self.edges)
        return RadialProfile(N=6, lam=0.0, r=self.edges, u=u, up=up,
                             source=self.state, breaks=self.edges)

    def expansion_ratio(self, n: int = 4001) -> float:
        """max over [0, 1] of |PU - U + 24 delta^2| / delta^4."""
        r = np.concatenate((np.linspace(0.0, 1.0, n), self.delta * np.geomspace(1e-3, 1e3, n)))
        r = r[r <= 1.0]
        dev = self(r) - self.bubble(r) + ALPHA6 * self.delta**2
        return float(np.abs(dev).max()) / self.delta**4


def project_bubble(delta: float, per_decade: int = PER_DECADE, order: int = 10) -> ProjectedBubble:
    if not 0 < delta < 0.3:
        raise ValueError("delta must lie in (0, 0.3)")
    edges = np.concatenate(([0.0], _log_edges(1e-4 * delta, 1.0, per_decade)))
    pb = ProjectedBubble(float(delta), edges, np.empty(0), np.empty(0), order)
    lo, hi = edges[:-1], edges[1:]
    inner = np.concatenate(([0.0], np.cumsum(pb._inner(lo, hi))))
    panels = pb._outer(lo, hi, inner[:-1])
    values = np.concatenate((np.cumsum(panels[::-1])[::-1], [0.0]))
    return ProjectedBubble(float(delta), edges, values, inner, order)


@dataclass(frozen=True, eq=False)
class AnsatzBundle:
    """W = u_bar + eps v0_bar - PU_delta sampled on a Gauss rule over [0, 1]."""

    eps: float
    d: float
    delta: float
    lambda_bar: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    dA: np.ndarray = field(repr=False)
    u_bar: np.ndarray = field(repr=False)
    v0_bar: np.ndarray = field(repr=False)
    PU: np.ndarray = field(repr=False)
    dPU: np.ndarray = field(repr=False)
    linearized: LinearizedBundle = field(repr=False)
    projected: ProjectedBubble | None = field(default=None, repr=False)

    @property
    def W(self) -> np.ndarray:
        return self.A - self.PU

    @property
    def dW(self) -> np.ndarray:
        return self.dA - self.dPU

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        y = self.linearized.traj.evaluate(r)
        c = self.linearized.c
        w = y[:, 0] + self.eps * (y[:, 2] + c * y[:, 4])
        if self.projected is not None:
            w = w - self.projected(r)
        return w


def _grid(delta: float | None, per_decade: int, order: int):
    lo = 1e-4 * delta if delta else 1e-4
    edges = [np.zeros(1), _log_edges(lo, 1.0, per_decade)]
    if delta:
        for c in (delta, math.sqrt(delta)):
            a, b = c / 10, min(10 * c, 1.0)
            if a < b:
                edges.append(_log_edges(a, b, 2 * per_decade))
    return np.unique(np.concatenate(edges))


def build_ansatz(critical: CriticalData, linearized: LinearizedBundle, eps: float, d: float,
                 *, bubble: bool = True, per_decade: int = PER_DECADE,
                 order: int = 8) -> AnsatzBundle:
    if critical.N != 6:
        raise ValueError("the ansatz is defined for N = 6")
    if not abs(eps) <= 0.1:
        raise ValueError("|eps| must not exceed 0.1")
    if bubble and (eps == 0 or not d > 0):
        raise ValueError("delta = |eps| d must be positive")
    delta = abs(eps) * d if bubble else 0.0
    pu = project_bubble(delta, per_decade) if bubble else None
    edges = _grid(delta, per_decade, order)
    lin = linearized
    c = lin.c

    def parts(r):
        y = lin.traj.evaluate(r)
        A = y[:, 0] + eps * (y[:, 2] + c * y[:, 4])
        dA = y[:, 1] + eps * (y[:, 3] + c * y[:, 5])
        P, dP = pu.state(r) if pu is not None else (np.zeros_like(r), np.zeros_like(r))
        return y, A, dA, P, dP

    # W changes sign where the bubble crosses the outer profile; |W|^3 has a
    # kink there, so the crossing becomes a panel edge.
    _, A_e, _, P_e, _ = parts(edges)
    W_e = A_e - P_e
    flips = np.nonzero(np.sign(W_e[:-1]) * np.sign(W_e[1:]) < 0)[0]
    extra = []
    for j in flips:
        def w(x):
            _, a_, _, p_, _ = parts(np.array([x]))
            return float(a_[0] - p_[0])
        extra.append(brentq(w, edges[j], edges[j + 1], xtol=1e-15 * edges[j + 1], rtol=1e-14))
    edges = np.unique(np.concatenate((edges, extra)))
    x, wts = panel_rule(edges, order)
    y, A, dA, P, dP = parts(x)
    return AnsatzBundle(
        eps=float(eps), d=float(d), delta=delta, lambda_bar=lin.lambda_bar,
        nodes=x, weights=wts, A=A, dA=dA, u_bar=y[:, 0],
        v0_bar=y[:, 2] + c * y[:, 4], PU=P, dPU=dP, linearized=lin, projected=pu,
    )


def residual_field(bundle: AnsatzBundle) -> np.ndarray:
    """-Lap W - |W| W - (lambda_bar + eps) W, using the equations of each piece."""
    ub, v0, lb, eps = bundle.u_bar, bundle.v0_bar, bundle.lambda_bar, bundle.eps
    lap = np.abs(ub) * ub + lb * ub + eps * ((2 * np.abs(ub) + lb) * v0 + ub)
    if bundle.projected is not None:
        lap = lap - bundle.projected.bubble(bundle.nodes) ** 2
    W = bundle.W
    return lap - np.abs(W) * W - (lb + eps) * W


def residual_norm(bundle: AnsatzBundle) -> float:
    """L^{3/2} norm over the unit ball in R^6."""
    R = residual_field(bundle)
    val = SIGMA6 * np.sum(bundle.weights * np.abs(R) ** 1.5 * bundle.nodes**5)
    return float(val ** (2.0 / 3.0))


def energy(obj, eps: float, lam_bar: float | None = None) -> float:
    """J(u) = int 1/2|grad u|^2 - (lam + eps)/2 u^2 - |u|^{2*}/2* over the unit ball.

    ``obj`` is a RadialProfile (lam defaults to its own lam) or an AnsatzBundle.
    """
    if isinstance(obj, AnsatzBundle):
        lam = obj.lambda_bar if lam_bar is None else lam_bar
        s, w, u, up, N = obj.nodes, obj.weights, obj.W, obj.dW, 6
    else:
        lam = obj.lam if lam_bar is None else lam_bar
        N = obj.N
        s, w = obj.quadrature_rule(10)
        u, up = obj.state(s)
    pc = 2.0 * N / (N - 2)
    dens = 0.5 * up * up - 0.5 * (lam + eps) * u * u - np.abs(u) ** pc / pc
    return float(sigma(N) * np.sum(w * dens * s ** (N - 1)))


@dataclass(frozen=True)
class ReducedEnergy:
    a1: float
    a2: float
    selector: float
    eps_sign: float
    lambda_bar: float

    @property
    def effective(self) -> float:
        return self.eps_sign * self.selector

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return self.effective * d * d * self.a1 - d**3 * self.a2

    @property
    def d0(self) -> float:
        v = 2 * self.a1 / (3 * self.a2) * self.effective
        return v if v > 0 else float("nan")

    @property
    def d0_closed_form(self) -> float:
        return 8 * math.sqrt(3) / 11 * abs(self.selector) / self.lambda_bar**1.5


def reduced_energy(linearized: LinearizedBundle, eps: float) -> ReducedEnergy:
    u0 = float(linearized.u_bar.u[0])
    return ReducedEnergy(
        a1=96 * SIGMA6,
        a2=11.0 / 9.0 * SIGMA6 * ALPHA6**1.5 * u0**1.5,
        selector=linearized.sign_selector,
        eps_sign=math.copysign(1.0, eps),
        lambda_bar=linearized.lambda_bar,
    )


def level_radius(delta: float, level: float) -> float:
    """Radius where U_delta equals ``level``; R0 sqrt(delta) to leading order."""
    q = math.sqrt(ALPHA6 / level) * delta - delta * delta
    if q <= 0:
        raise ValueError("level above the bubble maximum")
    return math.sqrt(q)


def R0(linearized: LinearizedBundle) -> float:
    return (ALPHA6 / float(linearized.u_bar.u[0])) ** 0.25


def a1_quadrature() -> float:
    """alpha6^2 int_{R^6} (1 + |y|^2)^{-4} dy by adaptive quadrature."""
    val, _ = quad(lambda t: t**5 / (1 + t * t) ** 4, 0.0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return ALPHA6**2 * SIGMA6 * val


def _outside_cube(delta: float) -> float:
    """int_{|x|>1} U_delta^3 dx."""
    d2 = delta * delta
    val, _ = quad(lambda r: (ALPHA6 * d2) ** 3 * r**5 / (d2 + r * r) ** 6, 1.0, np.inf,
                  epsabs=0, epsrel=1e-13)
    return SIGMA6 * val


def energy_shift(bundle: AnsatzBundle) -> float:
    """J(W) - J(u_bar + eps v0_bar) - (1/6) int_{R^6} U_delta^3.

    The bubble self-energy and J of the outer profile do not depend on d, so
    differences of this quantity in d are differences of J(W).  Writing PU =
    U - c with c = U_delta(1) and using -Lap PU = U^2 removes the O(1) and
    O(delta^-2) parts analytically, which keeps the O(eps^3) differences
    well above rounding.
    """
    if bundle.projected is None:
        raise ValueError("bundle has no bubble")
    s, w = bundle.nodes, bundle.weights
    lam = bundle.lambda_bar + bundle.eps
    U = bundle.projected.bubble(s)
    c = float(bundle.projected.bubble(1.0))
    A, PU = bundle.A, bundle.PU
    cross = np.abs(A - PU) ** 3 - np.abs(A) ** 3 - PU**3
    dens = (-A * U * U + 0.5 * c * U * U - c * c * U + c**3 / 3.0
            - 0.5 * lam * PU * PU + lam * A * PU - cross / 3.0)
    return float(SIGMA6 * np.sum(w * dens * s**5) - _outside_cube(bundle.delta) / 6.0)


def reduced_energy_check(critical: CriticalData, linearized: LinearizedBundle, eps: float,
                         d_grid, d_ref: float | None = None, with_residual: bool = False) -> dict:
    """Compare [J(W_d) - J(W_dref)]/|eps|^3 with the reduced energy difference.

    d_ref defaults to 2 d0, where the reduced energy is clearly negative, so
    that the comparison on [0.5 d0, 1.5 d0] never divides by a small number.
    """
    sel = linearized.sign_selector
    if abs(sel) <= SIGN_FLOOR:
        raise Indeterminate(f"sign selector {sel:.3e} within {SIGN_FLOOR}")
    Y = reduced_energy(linearized, eps)
    d_grid = np.asarray(d_grid, dtype=float)
    if d_ref is None:
        d_ref = 2.0 * (Y.d0 if math.isfinite(Y.d0) else Y.d0_closed_form)
    e3 = abs(eps) ** 3

    def shift(d):
        b = build_ansatz(critical, linearized, eps, d)
        return energy_shift(b), energy(b, eps), (residual_norm(b) if with_residual else float("nan"))

    K_ref = shift(d_ref)[0]
    rows = []
    for d in d_grid:
        K, J, res = shift(float(d))
        E = (K - K_ref) / e3
        dY = float(Y(d) - Y(d_ref))
        rows.append({"d": float(d), "J": J, "E": E, "dUpsilon": dY,
                     "rel_err": abs(E - dY) / abs(dY) if dY != 0 else float("inf"),
                     "residual_norm": res})
    E = np.array([r["E"] for r in rows])
    return {
        "eps": float(eps), "d_ref": float(d_ref), "d0": Y.d0, "a1": Y.a1, "a2": Y.a2,
        "selector": sel, "rows": rows,
        "d_star": float(d_grid[int(np.argmax(E))]),
    }
