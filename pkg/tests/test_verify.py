import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnlab import spectral
from bnlab.branch import shoot
from bnlab.errors import InsufficientTail, UnknownName
from bnlab.verify import (compare_profile, final_approach, fit_rate, limit_profile, tail_value,
                          theorem_constant, verify_theorem)


def _synthetic(p=-2.0, C=3.0, lb=10.0, n=40):
    d = np.geomspace(1e-3, 1e-1, n) * lb
    return {"lam": lb + d, "q": C * d**p}, lb


def test_power_fit_recovers_model():
    data, lb = _synthetic()
    fit = fit_rate(data, "q", lb, window=(1e-4, 1.0))
    assert fit.exponent == pytest.approx(-2.0, abs=1e-9)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
    assert fit.r_squared > 0.999999
    assert fit.n_points == 40


def test_log_models_recover():
    lb = 5.0
    d = np.geomspace(1e-8, 1e-2, 30)
    data = {"lam": lb - d, "q": 0.7 * d**0.5 * np.abs(np.log(d)) ** 2,
            "r": 1.3 * np.abs(np.log(d)) ** -0.5}
    fit = fit_rate(data, "q", lb, "power_with_log", window=(1e-12, 1.0), log_power=2)
    assert fit.exponent == pytest.approx(0.5, abs=1e-9) and fit.prefactor == pytest.approx(0.7, rel=1e-9)
    fit = fit_rate(data, "r", lb, "log_inverse_square", window=(1e-12, 1.0))
    assert fit.exponent == pytest.approx(-0.5, abs=1e-9) and fit.prefactor == pytest.approx(1.3, rel=1e-9)


def test_insufficient_tail():
    data, lb = _synthetic(n=5)
    with pytest.raises(InsufficientTail):
        fit_rate(data, "q", lb, window=(1e-4, 1.0))
    data = {"lam": 1 + np.geomspace(1e-3, 2e-3, 20), "q": np.ones(20)}
    with pytest.raises(InsufficientTail):
        fit_rate(data, "q", 1.0, window=(1e-4, 1.0))
    with pytest.raises(ValueError):
        fit_rate(data, "q", 1.0, "cubic")


def test_tail_value_geometric_mean():
    data, lb = _synthetic(p=0.0, C=2.0)
    val, drift, n = tail_value(data, "q", lb, (1e-4, 1.0))
    assert val == pytest.approx(2.0, rel=1e-14) and drift == 0.0 and n > 2


def test_final_approach_skips_early_crossing():
    # the tail starts at the largest gap after the last sign change
    assert final_approach(np.array([-1.0, 0.5, 0.2, 0.3, 0.1, 0.05])) == 1
    assert final_approach(np.array([-1.0, 0.2, 0.5, 0.3, 0.1])) == 2
    assert final_approach(np.array([3.0, 2.0, 1.0])) == 0


def test_constants_examples():
    assert theorem_constant("sup_norm_prefactor", 3, 2) == pytest.approx(
        3**0.25 * math.sqrt(27 * math.pi**3 / 10), rel=1e-14)
    assert theorem_constant("sup_norm_prefactor", 3, 2) == pytest.approx(12.041677861590, rel=1e-12)
    assert theorem_constant("r_slope", 3, 2) == pytest.approx(0.0300211, abs=5e-8)
    assert theorem_constant("theta_o", 3) == pytest.approx(2.7984, abs=1e-4)
    A1 = spectral.psi_integral(4, 1, 2, 3)
    assert theorem_constant("sup_norm_prefactor", 4, 2) == pytest.approx(16 / A1, rel=1e-12)
    lb = 22.469107870734632
    assert theorem_constant("norm_r_prefactor", 6, 2, {"lambda_bar": lb}) == pytest.approx(1152 / lb)
    s = 7.456838835897442
    aux = {"lambda_bar": lb, "v0_0": (s - 1) / 2}
    assert theorem_constant("sup_norm_prefactor", 6, 2, aux) == pytest.approx(121 * lb**3 / (8 * s * s))
    assert theorem_constant("r_prefactor", 6, 2, aux) == pytest.approx(
        4 * math.sqrt(6 / 11) * math.sqrt(s) / lb)


def test_bubble_constants():
    # a_N = int_0^inf r^{N-1}/(1+r^2)^{N-2} dr = B(N/2, N/2-2)/2
    from scipy.special import beta
    for N in (5, 6):
        assert theorem_constant("bubble_a", N) == pytest.approx(beta(N / 2, N / 2 - 2) / 2, rel=1e-10)
    with pytest.raises(ValueError):
        theorem_constant("bubble_a", 4)


def test_unknown_constant():
    with pytest.raises(UnknownName):
        theorem_constant("nope", 4, 2)


def test_n3_limit_profile_anchors():
    lim = limit_profile(3, 2)
    assert lim.s_bar == pytest.approx(0.5938359624878514, rel=1e-14)
    assert lim.annulus([lim.s_bar])[0] == pytest.approx(-1.0, abs=1e-13)
    assert abs(lim.annulus([1 / 3])[0]) < 1e-14


def test_profile_error_decreases_n4():
    lim = limit_profile(4, 2)
    errs = [compare_profile(shoot(4, 2, a, 1e-13), lim) for a in (1e2, 1e4, 1e6)]
    assert errs[0] > errs[1] > errs[2]


def test_profile_error_decreases_n6(critical6):
    lim = limit_profile(6, 2, critical6)
    errs = [compare_profile(shoot(6, 2, a, 1e-13), lim) for a in (1e5, 1e7, 1e9)]
    assert errs[0] > errs[1] > errs[2]


def test_report_schema(sweeps):
    rows = verify_theorem(5, 2, sweeps(5))
    for r in rows:
        assert {"theorem", "display_id", "predicted", "fitted", "tolerance", "pass"} <= set(r)
    ids = {r["display_id"] for r in rows}
    assert {"approach_side", "sup_norm_exponent", "r_lambda_exponent"} <= ids


def test_n5_intermediate_law(sweeps):
    rows = {r["display_id"]: r for r in verify_theorem(5, 2, sweeps(5))}
    r = rows["sup_norm_times_r_pow"]
    assert r["predicted"] == pytest.approx(15**0.75 * (24 / (math.pi * spectral.mu(5, 1))) ** 1.5)
    assert r["pass"]


def test_n6_intermediate_laws(sweeps, critical6, linearized6):
    rows = {r["display_id"]: r for r in verify_theorem(6, 2, sweeps(6), critical=critical6,
                                                        linearized=linearized6)}
    for k in ("sup_norm_times_r_pow", "du_times_r", "annulus_norm_limit",
              "lambda_bar_extrapolation", "nondegeneracy_margin"):
        assert rows[k]["pass"], rows[k]


@settings(max_examples=50, deadline=None)
@given(p=st.floats(-3, 3), C=st.floats(1e-3, 1e3), lb=st.floats(0.5, 100), side=st.sampled_from([-1, 1]))
def test_fit_recovery_property(p, C, lb, side):
    d = np.geomspace(1e-4, 1e-1, 25) * lb
    data = {"lam": lb + side * d, "q": C * d**p}
    fit = fit_rate(data, "q", lb, window=(1e-5, 1.0))
    assert fit.exponent == pytest.approx(p, abs=1e-6)
    assert fit.prefactor == pytest.approx(C, rel=1e-6)
