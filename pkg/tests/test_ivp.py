import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnlab.errors import NonFinite, RangeError, TooFewZeros
from bnlab.ivp import (IvpSpec, StopRule, check_integral_identity, identity_terms, integrate,
                       start_radius, taylor_coefficients)


def test_zero_data_gives_zero_solution():
    tr = integrate(IvpSpec(6, 1.0, 0.0, 5.0, 1e-10, 1e-10))
    assert np.all(tr.u == 0.0)
    assert tr.zeros.size == 0


def test_linear_regime_first_zero_is_pi():
    tr = integrate(IvpSpec(3, 1.0, 1e-6, 10.0, 1e-10, 1e-10), StopRule(1))
    assert abs(tr.zeros[0] - math.pi) < 1e-3 * math.pi
    # sin(r)/r is the exact solution of the linearized problem
    r = np.linspace(0.5, 3.0, 7)
    assert np.allclose(tr.value(r), 1e-6 * np.sin(r) / r, rtol=0, atol=1e-10)


def test_self_convergence_first_zero():
    coarse = integrate(IvpSpec(4, 1.0, 1.0, 10.0, 1e-10, 1e-10), StopRule(1))
    fine = integrate(IvpSpec(4, 1.0, 1.0, 10.0, 1e-12, 1e-12), StopRule(1))
    assert abs(coarse.zeros[0] - fine.zeros[0]) < 1e-8 * fine.zeros[0]


def test_taylor_coefficient_matches_averaged_equation():
    N, lam, a = 5, 2.0, 3.0
    c = taylor_coefficients(N, lam, a)
    f = abs(a) ** (4 / 3) * a
    assert c[0, 1] == pytest.approx(-(f + lam * a) / (2 * N), rel=1e-14)


def test_start_radius_bounded_by_formula():
    for N, a in [(3, 1.0), (3, 1e6), (6, 1e3)]:
        f = abs(a) ** (4 / (N - 2)) * a
        assert start_radius(N, 1.0, a, 1e-10) <= min(1e-6, (1e-10 / (1 + abs(f) + abs(a))) ** 0.25)


def test_halving_start_radius_changes_little():
    spec = IvpSpec(5, 1.0, 2.0, 3.0, 1e-12, 1e-12)
    r0 = start_radius(5, 1.0, 2.0, 1e-12)
    a = integrate(spec, r_start=r0)
    b = integrate(spec, r_start=r0 / 2)
    assert abs(a.value([1.0])[0] - b.value([1.0])[0]) < 1e-10


def test_zeros_interlace_critical_points():
    tr = integrate(IvpSpec(3, 1.0, 50.0, 40.0, 1e-10, 1e-10), StopRule(4))
    tr.check_structure()
    z, c = tr.zeros, tr.crits[:, 0]
    for lo, hi in zip(z[:-1], z[1:]):
        assert np.count_nonzero((c > lo) & (c < hi)) == 1
    assert np.all(np.abs(tr.value(z)) < 1e-12 * 50)


def test_too_few_zeros():
    with pytest.raises(TooFewZeros):
        integrate(IvpSpec(3, 1.0, 1.0, 2.0, 1e-10, 1e-10), StopRule(3))


@pytest.mark.parametrize("a", [1e40, 1e70, 1e200])
def test_overflow_reported(a):
    with pytest.raises(NonFinite):
        integrate(IvpSpec(3, 1.0, a, 1.0, 1e-10, 1e-10))


def test_invalid_spec():
    with pytest.raises(ValueError):
        IvpSpec(7, 1.0, 1.0, 1.0, 1e-10, 1e-10)
    with pytest.raises(ValueError):
        IvpSpec(3, 1.0, 1.0, -1.0, 1e-10, 1e-10)


def test_identity_empty_interval_is_zero():
    tr = integrate(IvpSpec(4, 1.0, 3.0, 5.0, 1e-10, 1e-10), StopRule(1))
    assert check_integral_identity(tr, 1.0, 1.0) == 0.0


def test_identity_outside_range():
    tr = integrate(IvpSpec(4, 1.0, 3.0, 5.0, 1e-10, 1e-10), StopRule(1))
    with pytest.raises(RangeError):
        check_integral_identity(tr, 0.5, 10.0)


def test_identity_linear_regime():
    tr = integrate(IvpSpec(3, 1.0, 1e-6, 10.0, 1e-10, 1e-10), StopRule(2))
    assert abs(check_integral_identity(tr, 0.7, 5.5)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(N=st.sampled_from([3, 4, 5, 6]), a=st.floats(0.1, 1e3),
       u=st.floats(0.01, 1.0), v=st.floats(0.01, 1.0))
def test_identity_residual_property(N, a, u, v):
    tol = 1e-10
    tr = integrate(IvpSpec(N, 1.0, a, 30.0, tol, tol), StopRule(2))
    lo, hi = sorted((u * tr.r_end, v * tr.r_end))
    res, scale = identity_terms(tr, lo, hi)
    bound = 10 * tol * max(float(np.abs(tr.u_prime).max()), scale)
    assert abs(res) <= bound
