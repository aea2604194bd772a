import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momalign.errors import ConfigError, DegenerateWarpError, WarpOverflowError
from momalign.spline_core import make_basis
from momalign.warp import (WarpModel, WarpPlan, identity_warp, warp_derivative, warp_eval,
                           warp_penalty)

T = 2.0
BASIS = make_basis((0.0, T), 6)
# coefficients reproducing f(s) = s exactly (Greville abscissae)
GREVILLE = np.array([BASIS.knot_array[i + 1:i + 4].mean() for i in range(6)])


def test_identity_members_are_identity():
    t = np.linspace(0, T, 9)
    for fam in ("identity", "linear", "free", "standardized"):
        w = identity_warp(fam, (0.0, T), BASIS if fam in ("free", "standardized") else None)
        assert np.allclose(warp_eval(w, t), t, atol=1e-12)
        assert warp_penalty(w) == pytest.approx(0.0, abs=1e-20)


def test_linear_closed_form():
    w = WarpModel("linear", (0.0, T), alpha=0.3, beta=1.5)
    assert warp_eval(w, 1.0) == pytest.approx(1.8)
    assert warp_derivative(w, 0.4) == pytest.approx(1.5)
    assert warp_penalty(w) == pytest.approx((T * (1 / 1.5 - 1)) ** 2)
    assert np.allclose(w.params(), [0.3, np.log(1.5)])


def test_free_warp_with_constant_exponent():
    c = 0.4
    w = WarpModel("free", (0.0, T), BASIS, gamma0=0.1, gamma=np.full(6, c))
    t = np.linspace(0, T, 11)
    assert np.allclose(warp_eval(w, t), 0.1 + np.exp(c) * t, atol=1e-10)
    assert warp_penalty(w) == pytest.approx((T * (np.exp(-c) - 1)) ** 2, rel=1e-9)


def test_standardized_warp_with_linear_exponent():
    a = 1.3
    w = WarpModel("standardized", (0.0, T), BASIS, gamma=a * GREVILLE)
    t = np.linspace(0, T, 17)
    expected = T * np.expm1(a * t) / np.expm1(a * T)
    assert np.max(np.abs(warp_eval(w, t) - expected)) <= 1e-9
    S, K = np.expm1(a * T) / a, -np.expm1(-a * T) / a
    assert warp_penalty(w) == pytest.approx((S * K / T - T) ** 2, rel=1e-8)


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_standardized_is_pinned_and_increasing(gamma):
    w = WarpModel("standardized", (0.0, T), BASIS, gamma=np.array(gamma))
    t = np.linspace(0, T, 401)
    W = warp_eval(w, t)
    assert abs(W[0]) <= 1e-12 and abs(W[-1] - T) <= 1e-9
    assert np.all(np.diff(W) > 0)
    assert warp_penalty(w) >= 0


def test_shift_of_gamma_leaves_standardized_warp_unchanged(rng):
    g = rng.normal(size=6)
    t = np.linspace(0, T, 23)
    a = WarpModel("standardized", (0.0, T), BASIS, gamma=g)
    b = WarpModel("standardized", (0.0, T), BASIS, gamma=g + 2.5)
    assert np.allclose(warp_eval(a, t), warp_eval(b, t), atol=1e-12)


@pytest.mark.parametrize("family", ["linear", "free", "standardized"])
def test_parameter_gradients_match_finite_differences(family, rng):
    t = np.sort(rng.uniform(0, T, 15))
    w = identity_warp(family, (0.0, T), BASIS if family != "linear" else None)
    x = rng.normal(scale=0.5, size=w.n_params)
    plan = WarpPlan(family, (0.0, T), w.basis, t)
    st0 = plan.evaluate(w.with_params(x))
    h = 1e-6
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        hi = plan.evaluate(w.with_params(x + e), with_grad=False)
        lo = plan.evaluate(w.with_params(x - e), with_grad=False)
        assert np.allclose((hi.W - lo.W) / (2 * h), st0.dW[:, j], atol=1e-7)
        assert (hi.penalty - lo.penalty) / (2 * h) == pytest.approx(st0.dpenalty[j], abs=1e-7,
                                                                    rel=1e-5)


def test_slope_is_derivative_of_warp(rng):
    w = WarpModel("standardized", (0.0, T), BASIS, gamma=rng.normal(size=6))
    t = np.linspace(0.1, 1.9, 13)
    h = 1e-5
    fd = (warp_eval(w, t + h) - warp_eval(w, t - h)) / (2 * h)
    assert np.allclose(fd, warp_derivative(w, t), rtol=1e-6)


def test_overflow_names_the_coefficient():
    g = np.zeros(6)
    g[2] = 2000.0
    w = WarpModel("free", (0.0, T), BASIS, gamma=g)
    with pytest.raises(WarpOverflowError, match=r"gamma\[2\]"):
        warp_eval(w, [0.5])


def test_degenerate_slopes_rejected():
    with pytest.raises(DegenerateWarpError):
        warp_eval(WarpModel("free", (0.0, T), BASIS, gamma=np.full(6, -720.0)), [0.5])
    with pytest.raises(DegenerateWarpError):
        warp_eval(WarpModel("linear", (0.0, T), beta=1e-13), [0.5])
    with pytest.raises(WarpOverflowError):
        WarpModel("linear", (0.0, T)).with_params([0.0, 701.0])


def test_invalid_models():
    with pytest.raises(ConfigError):
        WarpModel("linear", (0.0, T), beta=-1.0)
    with pytest.raises(ConfigError):
        WarpModel("standardized", (0.0, T))
    with pytest.raises(ConfigError):
        WarpModel("cubic", (0.0, T))
