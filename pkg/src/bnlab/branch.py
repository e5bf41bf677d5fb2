"""Nodal radial solutions on the unit ball by shooting and rescaling.

A solution of the IVP at lam = 1 with u(0) = a whose m-th zero sits at R
becomes, after v(r) = R^{(N-2)/2} u(R r), a solution on the unit ball with
lam = R^2 and exactly m nodal zones.  Sweeping a therefore traces the whole
branch with one IVP solve per point.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import NumericalError, StructureViolation
from .ivp import IvpSpec, StopRule, Trajectory, f, integrate
from .profile import NodalData, RadialProfile


def scaled_profile(traj: Trajectory, s: float, zones: int, sign: float = 1.0) -> RadialProfile:
    """v(r) = sign * s^{(N-2)/2} u(s r) on [0, r_end/s]; solves the problem with lam*s^2."""
    N = traj.N
    amp = sign * s ** ((N - 2) / 2)
    damp = sign * s ** (N / 2)
    hi = min(traj.r_end, traj.zeros[zones - 1]) if traj.zeros.size >= zones else traj.r_end
    nodes = traj.nodes
    nodes = nodes[nodes <= hi]
    if nodes[-1] < hi:
        nodes = np.append(nodes, hi)
    st = traj.evaluate(nodes)

    def source(r, _t=traj, _s=s, _a=amp, _d=damp):
        y = _t.evaluate(np.asarray(r) * _s)
        return _a * y[:, 0], _d * y[:, 1]

    zeros = traj.zeros[traj.zeros < hi] / s
    crits = traj.crits[traj.crits[:, 0] < hi] if traj.crits.size else np.empty((0, 2))
    crits = np.column_stack((crits[:, 0] / s, amp * crits[:, 1])) if crits.size else crits
    r = nodes / s
    return RadialProfile(
        N=N, lam=traj.lam * s * s, r=r, u=amp * st[:, 0], up=damp * st[:, 1],
        zones=zones, zeros=zeros, crits=crits, source=source, breaks=r,
    )


def analyze_nodal(profile: RadialProfile) -> NodalData:
    """Zeros, extrema and per-zone sup norms; asserts interlacing and ordering."""
    m = profile.zones
    r_i = np.asarray(profile.zeros, dtype=float)
    if r_i.size != m - 1:
        raise StructureViolation(f"expected {m - 1} interior zeros, found {r_i.size}")
    crits = profile.crits
    cr = crits[:, 0] if crits.size else np.empty(0)
    edges = np.concatenate(([0.0], r_i, [profile.r_end]))
    M = np.empty(m)
    M[0] = abs(profile.u[0])
    if np.any(cr < edges[1]):
        raise StructureViolation("critical point inside the first nodal zone")
    for i in range(1, m):
        inside = np.nonzero((cr > edges[i]) & (cr < edges[i + 1]))[0]
        if inside.size != 1:
            raise StructureViolation(f"zone {i + 1} has {inside.size} critical points")
        M[i] = abs(crits[inside[0], 1])
    if np.any(np.diff(M) >= 0):
        raise StructureViolation(f"extremal values not strictly decreasing: {M}")
    if m >= 2:
        s_lambda = float(cr[0])
        M_lambda = float(M[1:].max())
    else:
        s_lambda = M_lambda = float("nan")
    return NodalData(r_i=r_i, s_lambda=s_lambda, M=M, M_lambda=M_lambda, crits=crits)


@dataclass(frozen=True, eq=False)
class BranchPoint:
    N: int
    m: int
    a: float
    lam: float
    eps: float
    sup_norm: float
    profile: RadialProfile = field(repr=False)
    traj: Trajectory = field(repr=False)

    @property
    def nodal(self) -> NodalData:
        return self.profile.nodal

    @property
    def r_lambda(self) -> float:
        return self.nodal.r_lambda if self.m >= 2 else 1.0

    @property
    def du_at_r_lambda(self) -> float:
        """u'(r_lambda) on the unit-ball profile."""
        return float(self.profile.derivative([self.r_lambda])[0])


def shoot_radius(N: int, m: int) -> float:
    """Upper bound for the m-th zero at lam = 1.

    f(u)/u >= 0, so by Sturm comparison zeros come no later than those of the
    linear equation, whose m-th zero is j_{N/2-1, m}.
    """
    return 1.05 * spectral.bessel_zero(spectral.order(N), m) + 1.0


def shoot(N: int, m: int, a: float, tol: float = 1e-10) -> BranchPoint:
    """m-nodal-zone solution on the unit ball from central value a at lam = 1."""
    if not a > 0:
        raise ValueError("a must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    traj = integrate(IvpSpec(N, 1.0, a, shoot_radius(N, m), tol, tol), StopRule(m))
    R = float(traj.zeros[m - 1])
    prof = scaled_profile(traj, R, m)
    nodal = analyze_nodal(prof)
    prof = _with_nodal(prof, nodal)
    z1 = float(traj.zeros[0])
    return BranchPoint(
        N=N, m=m, a=a, lam=R * R, eps=z1 * z1,
        sup_norm=R ** ((N - 2) / 2) * a, profile=prof, traj=traj,
    )


def _with_nodal(prof: RadialProfile, nodal: NodalData) -> RadialProfile:
    return RadialProfile(
        N=prof.N, lam=prof.lam, r=prof.r, u=prof.u, up=prof.up, zones=prof.zones,
        zeros=prof.zeros, crits=prof.crits, nodal=nodal, source=prof.source,
        breaks=prof.breaks,
    )


def rescale_to_positive(point: BranchPoint) -> RadialProfile:
    """First nodal zone blown up to the unit ball: v(x) = r^{(N-2)/2} u(r x), r = r_lambda.

    Solves the positive problem with parameter eps = lam r_lambda^2.
    """
    prof = scaled_profile(point.traj, float(point.traj.zeros[0]), 1)
    return _with_nodal(prof, analyze_nodal(prof))


@dataclass
class BranchTable:
    N: int
    m: int
    points: list[BranchPoint]
    failures: list[tuple[float, str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def column(self, name: str) -> np.ndarray:
        if name == "r_lambda":
            return np.array([p.r_lambda for p in self.points])
        if name == "s_lambda":
            return np.array([p.nodal.s_lambda for p in self.points])
        if name == "M_annulus":
            return np.array([p.nodal.M_lambda for p in self.points])
        if name == "du_r_lambda":
            return np.array([p.du_at_r_lambda for p in self.points])
        return np.array([getattr(p, name) for p in self.points], dtype=float)

    def header(self) -> list[str]:
        return (["a", "lambda"] + [f"r{i}" for i in range(1, self.m)]
                + ["s_lambda", "sup_norm", "M_annulus", "eps"])

    def rows(self):
        for p in self.points:
            nd = p.nodal
            yield [p.a, p.lam, *nd.r_i, nd.s_lambda, p.sup_norm, nd.M_lambda, p.eps]

    def to_csv(self, fh=None) -> str | None:
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([format(float(x), ".17g") for x in row])
        return None if fh is not None else out.getvalue()


def default_a_grid(N: int, a_min: float = 1e-2, a_max: float | None = None,
                   per_decade: int = 40) -> np.ndarray:
    """Log-spaced central values; the upper end depends on N (see DEFAULT_A_MAX)."""
    a_max = DEFAULT_A_MAX[N] if a_max is None else a_max
    n = int(round(math.log10(a_max / a_min) * per_decade)) + 1
    return np.geomspace(a_min, a_max, n)


# Largest central values whose lam is still converged in the tolerance at
# DEFAULT_TOL.  Shooting from the origin amplifies rounding in the bubble core
# by a factor that grows with a, and beyond these values lam is noise.
DEFAULT_A_MAX = {3: 1e4, 4: 1e7, 5: 1e11, 6: 1e10}
DEFAULT_TOL = {3: 1e-13, 4: 1e-13, 5: 1e-14, 6: 1e-14}


def sweep(N: int, m: int, a_grid, jobs: int = 1, tol: float | None = None) -> BranchTable:
    """One branch point per central value; failures are recorded, not raised."""
    tol = DEFAULT_TOL[N] if tol is None else tol
    grid = np.asarray(a_grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("a_grid must be positive and strictly increasing")

    def one(a):
        try:
            return shoot(N, m, float(a), tol)
        except NumericalError as exc:
            return (float(a), type(exc).__name__, str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(one, grid))
    else:
        results = [one(a) for a in grid]
    pts = [r for r in results if isinstance(r, BranchPoint)]
    fails = [r for r in results if not isinstance(r, BranchPoint)]
    return BranchTable(N=N, m=m, points=pts, failures=fails)


def lambda_window(N: int) -> tuple[float, float]:
    """Admissible open interval for eps = lam r_lambda^2."""
    if N == 3:
        return math.pi**2 / 4, math.pi**2
    return 0.0, spectral.mu(N, 1)


def annulus_identity(point: BranchPoint) -> tuple[float, float]:
    """Both sides of -u(s) = [ -r^{2-N} int_r^s t^{N-1} g + int_r^s t g ] / (N-2),
    with r = r_lambda, s = s_lambda and g = f(u) + lam u."""
    N, lam = point.N, point.lam
    nd = point.nodal
    r, s = nd.r_lambda, nd.s_lambda
    prof = point.profile
    q, w = prof.quadrature_rule(12, r, s)
    u = prof(q)
    g = f(u, N) + lam * u
    i1 = float(np.sum(w * q ** (N - 1) * g))
    i2 = float(np.sum(w * q * g))
    rhs = (-(r ** (2 - N)) * i1 + i2) / (N - 2)
    return float(-prof([s])[0]), rhs


def bounds_report(point: BranchPoint) -> dict:
    """Every structural inequality a branch point must satisfy."""
    N = point.N
    lo, hi = lambda_window(N)
    nd = point.nodal
    out = {
        "scaling": abs(point.sup_norm / point.lam ** ((N - 2) / 4) - point.a) / point.a,
        "window": lo < point.eps < hi,
        "ordering": bool(np.all(np.diff(nd.M) < 0)),
        "zero_count": nd.r_i.size == point.m - 1,
    }
    if point.m >= 2:
        bound = -point.r_lambda * point.du_at_r_lambda / (N - 2)
        out["annulus_bound"] = nd.M_lambda <= bound * (1 + 1e-9)
        lhs, rhs = annulus_identity(point)
        out["annulus_identity"] = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return out
