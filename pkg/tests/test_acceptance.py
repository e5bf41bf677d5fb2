"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest, or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys

import numpy as np
import pytest
from scipy import special

from bnlab import ansatz6 as A
from bnlab import spectral
from bnlab.branch import bounds_report, shoot
from bnlab.linear6 import z0_crosscheck
from bnlab.profile import RadialProfile
from bnlab.verify import fit_rate, verify_theorem

from conftest import ACCEPTANCE_LINES


def _report(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _rows(rows, ids):
    by_id = {r["display_id"]: r for r in rows}
    picked = [by_id[i] for i in ids]
    bad = [f"{r['display_id']} (fitted {r['fitted']}, predicted {r['predicted']})"
           for r in picked if not r["pass"]]
    return not bad, bad


def test_criterion_1_scaling_identity():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(200):
        N = int(rng.integers(3, 7))
        m = int(rng.integers(1, 5))
        a = 10.0 ** rng.uniform(-2, 3)
        p = shoot(N, m, a)
        worst = max(worst, abs(p.sup_norm / p.lam ** ((N - 2) / 4) - a) / a)
    _report(1, worst < 1e-8, f"200 random shots, max |sup/lam^((N-2)/4) - a|/a = {worst:.2e} (< 1e-8)")


def test_criterion_2_bounds_along_default_sweeps(sweeps):
    bad, worst_s, worst_i, n = [], 0.0, 0.0, 0
    for N in (3, 4, 5, 6):
        for p in sweeps(N).points:
            rep = bounds_report(p)
            n += 1
            worst_s = max(worst_s, rep["scaling"])
            worst_i = max(worst_i, rep["annulus_identity"])
            flags = [k for k in ("window", "ordering", "zero_count", "annulus_bound") if not rep[k]]
            if flags or rep["scaling"] >= 1e-8 or rep["annulus_identity"] >= 1e-6:
                bad.append((N, p.a, flags))
    _report(2, not bad, f"{n} points, scaling {worst_s:.1e} (< 1e-8), annulus identity "
                        f"{worst_i:.1e} (< 1e-6), {len(bad)} violations")


def test_criterion_3_n3_blowup(sweeps):
    ok, bad = _rows(verify_theorem(3, 2, sweeps(3)),
                    ["approach_side", "sup_norm_exponent", "sup_norm_prefactor", "r_lambda_slope",
                     "annulus_anchors"])
    _report(3, ok, "N=3 side, exponent, prefactor, slope, anchors" + (f"; failing: {bad}" if bad else ""))


def test_criterion_4_n4_blowup(sweeps):
    ok, bad = _rows(verify_theorem(4, 2, sweeps(4)),
                    ["approach_side", "sup_norm_times_gap", "r_lambda_sq_log_gap"])
    _report(4, ok, "N=4 side and both log-corrected laws" + (f"; failing: {bad}" if bad else ""))


def test_criterion_5_n5_blowup(sweeps):
    ok, bad = _rows(verify_theorem(5, 2, sweeps(5)),
                    ["approach_side", "sup_norm_exponent", "r_lambda_exponent", "r_lambda_prefactor"])
    _report(5, ok, "N=5 side, sup and r exponents, r prefactor" + (f"; failing: {bad}" if bad else ""))


def test_criterion_6_n6_blowup(sweeps, critical6, linearized6):
    rows = verify_theorem(6, 2, sweeps(6), critical=critical6, linearized=linearized6)
    ok, bad = _rows(rows, ["lambda_bar_extrapolation", "approach_side", "sup_norm_times_gap_sq",
                           "r_lambda_over_sqrt_gap", "nondegeneracy_margin"])
    _report(6, ok, "N=6 extrapolation, side, both prefactors, margin" + (f"; failing: {bad}" if bad else ""))


def test_criterion_7_z0_crosscheck(linearized6):
    z = z0_crosscheck(linearized6)
    ok = z.boundary_error < 1e-6 and z.proportionality_error < 1e-6 and z.center_error < 1e-8
    _report(7, ok, f"z0 boundary {z.boundary_error:.1e}, proportionality {z.proportionality_error:.1e} "
                   f"(< 1e-6), center {z.center_error:.1e} (< 1e-8)")


def test_criterion_8_ansatz(critical6, linearized6):
    notes, ok = [], True
    Y = A.reduced_energy(linearized6, 1e-3)
    e = abs(Y.d0 / Y.d0_closed_form - 1)
    ok &= e < 1e-12
    notes.append(f"d0 identity {e:.1e}")
    e = abs(A.a1_quadrature() / (96 * math.pi**3) - 1)
    ok &= e < 1e-8
    notes.append(f"a1 {e:.1e}")
    ratios = [A.project_bubble(d).expansion_ratio() for d in (0.1, 0.05, 0.025)]
    band = max(ratios) / min(ratios)
    ok &= band < 1.1
    notes.append(f"PU ratios {min(ratios):.3g}..{max(ratios):.3g}")
    eps = np.array([1e-1, 1e-2, 1e-3])
    d0 = Y.d0
    slope = min(np.polyfit(np.log(eps), np.log([A.residual_norm(A.build_ansatz(critical6, linearized6, x, d))
                                                for x in eps]), 1)[0] for d in (d0, 2 * d0))
    ok &= slope >= 1.8
    notes.append(f"residual exponent {slope:.3f}")
    grid = np.linspace(0.5, 1.5, 5) * d0
    rep = A.reduced_energy_check(critical6, linearized6, 1e-3, grid)
    worst = max(r["rel_err"] for r in rep["rows"])
    ok &= worst < 0.2
    notes.append(f"reduced energy rel err {worst:.2f} (< 0.2)")
    _report(8, bool(ok), ", ".join(notes))


def test_criterion_9_spectral():
    notes, ok = [], True
    res = max(abs(special.jv(nu, spectral.bessel_zero(nu, h)))
              for nu in spectral.SUPPORTED_ORDERS for h in range(1, 9))
    ok &= res < 1e-10
    notes.append(f"Bessel residual {res:.1e}")
    r = np.linspace(0, 1, 20001)[:-1]
    counts = all(np.count_nonzero(np.diff(np.sign(spectral.psi(N, h, r))) != 0) == h - 1
                 for N in (3, 4, 5, 6) for h in (1, 2, 3, 4))
    ok &= counts
    notes.append("psi zero counts" + ("" if counts else " WRONG"))
    k = math.pi / 2
    rr = np.linspace(0.01, 1, 500)
    c, s = np.cos(k * rr), np.sin(k * rr)
    d2 = (-k * k * c / rr + 2 * k * s / rr**2 + 2 * c / rr**3) / (4 * math.pi)
    g = np.max(np.abs(-d2 - 2 / rr * spectral.green_V_prime(rr) - k * k * spectral.green_V(rr)))
    ok &= g < 1e-8
    notes.append(f"green_V ODE {g:.1e}")
    worst = 0.0
    for N in (3, 4, 5, 6):
        nu = spectral.order(N)
        for h in (1, 2):
            j = spectral.bessel_zero(nu, h)
            c0 = 1 / (2**nu * math.gamma(nu + 1))
            ref = special.jv(nu + 1, j) ** 2 / (2 * c0**2 * j ** (2 * nu))
            worst = max(worst, abs(spectral.psi_integral(N, h, 2, N - 1) / ref - 1))
    ok &= worst < 1e-8
    notes.append(f"psi integral {worst:.1e}")
    from bnlab.branch import rescale_to_positive

    v = rescale_to_positive(shoot(4, 1, 3.0, 1e-11))
    q = {}
    for e in (0.5, 2.0, 7.5):
        q[e] = spectral.sobolev_quotient(RadialProfile(N=4, lam=e, r=v.r, u=v.u, up=v.up, zones=1,
                                                       source=v.source, breaks=v.breaks))
    L = spectral.ball_volume(4) ** 0.5
    lip = all(abs(q[a] - q[b]) <= abs(a - b) * L * (1 + 1e-10) for a in q for b in q)
    ok &= lip
    notes.append("Lipschitz bound" + ("" if lip else " VIOLATED"))
    _report(9, bool(ok), ", ".join(notes))


def test_criterion_10_synthetic_fit():
    lb = 10.0
    d = np.geomspace(1e-3, 1e-1, 40) * lb
    fit = fit_rate({"lam": lb + d, "q": 3.0 * d**-2.0}, "q", lb, window=(1e-4, 1.0))
    e = max(abs(fit.exponent + 2.0), abs(fit.prefactor / 3.0 - 1))
    _report(10, e < 1e-6, f"recovered exponent {fit.exponent:.12g}, prefactor {fit.prefactor:.12g}, "
                          f"error {e:.1e} (< 1e-6)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
