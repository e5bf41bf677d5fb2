import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnlab.critical import lambda_bar
from bnlab.errors import Indeterminate
from bnlab.linear6 import LinearizedBundle, predict_sign, solve_v0, z0_crosscheck

# scipy solve_ivp (DOP853, rtol 1e-13) of the three coupled equations at the
# frozen lambda_bar, then c = -p(1)/h(1)
V0_BAR_0 = -3.228419417944217


def test_v0_bar_center_against_independent_integrator(linearized6):
    assert linearized6.v0_bar_0 == pytest.approx(V0_BAR_0, rel=1e-9)
    assert linearized6.v0_bar_0 == pytest.approx(linearized6.c, rel=1e-15)


def test_v0_bar_boundary_and_center(linearized6):
    v = linearized6.v0_bar
    assert abs(v([1.0])[0]) < 1e-12 * abs(linearized6.v0_bar_0)
    assert v.up[0] == 0.0


def test_u_bar_convention(linearized6):
    assert linearized6.u_bar.u[0] == pytest.approx(linearized6.lambda_bar / 2, rel=1e-15)
    assert abs(linearized6.u_bar([1.0])[0]) < 1e-10


def test_selector_and_sign_for_two_zones(linearized6):
    assert linearized6.sign_selector > 0
    assert linearized6.sign_selector == pytest.approx(1 - 2 * V0_BAR_0, rel=1e-9)
    assert predict_sign(linearized6) == "above"
    assert linearized6.nondegeneracy_margin > 1e-3


def test_v0_ode_residual(linearized6):
    # -v'' - 5v'/r - (2|u|+lam)v - u, with v'' from a centered difference of v'
    lb = linearized6.lambda_bar
    r = np.linspace(0.01, 0.99, 300)
    e = 1e-5
    v, dv = linearized6.v0_bar.state(r)
    d2 = (linearized6.v0_bar.derivative(r + e) - linearized6.v0_bar.derivative(r - e)) / (2 * e)
    u = linearized6.u_bar(r)
    res = -d2 - 5 / r * dv - (2 * np.abs(u) + lb) * v - u
    assert np.max(np.abs(res)) < 1e-7 * np.max(np.abs(linearized6.u_bar.u))


def test_linearity_in_source(critical6, linearized6):
    t = 2.5
    b = solve_v0(critical6, source_scale=t)
    assert b.c == pytest.approx(t * linearized6.c, rel=1e-12)
    r = np.linspace(0, 1, 11)
    assert np.allclose(b.v0_bar(r), t * linearized6.v0_bar(r), rtol=1e-12, atol=1e-12)


def test_z0_checks(linearized6):
    z = z0_crosscheck(linearized6)
    assert z.boundary_error < 1e-6
    assert z.proportionality_error < 1e-6
    assert z.center_error < 1e-8
    assert z.z0_at_0 > 0


def test_three_zones_conditional():
    b = solve_v0(lambda_bar(6, 3))
    assert b.nondegeneracy_margin > 1e-6
    assert np.isfinite(b.sign_selector)


def _with_selector(bundle, value):
    # a bundle whose v0_bar(0) gives the requested selector; only the center value matters
    v0 = (1 - value) / 2
    prof = bundle.v0_bar.scaled(v0 / bundle.v0_bar_0)
    return LinearizedBundle(bundle.lambda_bar, bundle.u_bar, prof, bundle.p, bundle.h,
                            bundle.c, bundle.nondegeneracy_margin, bundle.traj)


def test_predict_sign_below_and_indeterminate(linearized6):
    assert predict_sign(_with_selector(linearized6, -0.3)) == "below"
    with pytest.raises(Indeterminate):
        predict_sign(_with_selector(linearized6, 1e-8))


@settings(max_examples=25, deadline=None)
@given(value=st.floats(-10, 10).filter(lambda x: abs(x) > 1e-5))
def test_predict_sign_follows_selector(linearized6, value):
    b = _with_selector(linearized6, value)
    assert b.sign_selector == pytest.approx(value, rel=1e-9, abs=1e-12)
    assert predict_sign(b) == ("above" if value > 0 else "below")
