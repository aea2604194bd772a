import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momalign.errors import ConfigError, FlatCurveError
from momalign.feature_moments import (AmplitudeMoments, FeatureSpec, MomentSpec, feature_weights,
                                      moment, moments, parse_feature, parse_features,
                                      target_moments)
from momalign.spline_core import Curve, basis_matrix, make_basis, quad_grid, trapezoid_weights

from conftest import two_bumps

GRID = quad_grid((0.0, 1.0))


def ramp(t, deriv=0):
    t = np.asarray(t, dtype=float)
    return t if deriv == 0 else (np.ones_like(t) if deriv == 1 else np.zeros_like(t))


def beta_moments(a, b):
    mean = a / (a + b)
    var = a * b / ((a + b) ** 2 * (a + b + 1))
    return mean, var


@pytest.mark.parametrize("r,tol", [(10.0, 1e-5), (100.0, 1e-3)])
def test_max_and_min_of_a_ramp_are_beta_densities(r, tol):
    # (t - 0)^r normalizes to Beta(r+1, 1); (1 - t)^r to Beta(1, r+1)
    m, v = beta_moments(r + 1, 1)
    got = moments(ramp, FeatureSpec("max", r), (1, 2), GRID)
    assert got == pytest.approx([m, v], rel=tol)
    m, v = beta_moments(1, r + 1)
    got = moments(ramp, FeatureSpec("min", r), (1, 2), GRID)
    assert got == pytest.approx([m, v], rel=tol)


def test_deriv_zero_of_a_ramp():
    # density 2t: mean 2/3, variance 1/18, third central moment -1/135
    got = moments(ramp, FeatureSpec("deriv", m=0), (1, 2, 3), GRID)
    assert got == pytest.approx([2 / 3, 1 / 18, -1 / 135], rel=1e-5)


def test_deriv_one_of_a_parabola_matches_ramp():
    def parab(t, deriv=0):
        return [t ** 2, 2 * t, 2 + 0 * t][deriv]

    got = moments(parab, FeatureSpec("deriv", m=1), (1, 2), GRID)
    assert got == pytest.approx([2 / 3, 1 / 18], rel=1e-6)


def test_local_weight_on_a_parabola():
    # g'' = 2, so the weight is exp(-sqrt(2) r |t - 1/2|)
    r = 5.0
    a = np.sqrt(2) * r

    def parab(t, deriv=0):
        t = np.asarray(t, dtype=float)
        return [(t - 0.5) ** 2, 2 * (t - 0.5), 2 + 0 * t][deriv]

    h = 0.5
    mass = (1 - np.exp(-a * h)) / a
    second = (2 - np.exp(-a * h) * (a * a * h * h + 2 * a * h + 2)) / a ** 3
    got = moments(parab, FeatureSpec("local", r), (1, 2), GRID)
    assert got[0] == pytest.approx(0.5, abs=1e-12)
    assert got[1] == pytest.approx(second / mass, rel=1e-5)


def test_local_weight_vanishes_where_curvature_is_zero():
    def cubic(t, deriv=0):
        t = np.asarray(t, dtype=float)
        return [(t - 0.5) ** 3, 3 * (t - 0.5) ** 2, 6 * (t - 0.5)][deriv]

    I = feature_weights(cubic, FeatureSpec("local", 1.0), GRID)
    assert I[1000] == 0.0 and np.all(I >= 0)
    assert trapezoid_weights(GRID) @ I == pytest.approx(1.0)


@given(st.floats(-0.5, 0.5), st.floats(0.5, 2.0))
def test_moments_follow_affine_time_maps(a, b):
    # g_b(s) = g((s - a) / b) has mu1 -> b mu1 + a and mu_k -> b^k mu_k
    spec = FeatureSpec("max", 100.0)
    base = moments(two_bumps, spec, (1, 2), quad_grid((-0.6, 1.8), 4001))
    grid = quad_grid((-0.6 * b + a, 1.8 * b + a), 4001)
    moved = moments(lambda s, d=0: two_bumps((s - a) / b, d) / b ** d, spec, (1, 2), grid)
    assert abs(moved[0] - (b * base[0] + a)) <= 1e-3
    assert abs(moved[1] / (b * b * base[1]) - 1) <= 1e-3


def test_flat_curves_have_no_feature_mass():
    flat = lambda t, d=0: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
    for spec in (FeatureSpec("max"), FeatureSpec("min"), FeatureSpec("deriv", m=1)):
        with pytest.raises(FlatCurveError):
            moment(flat, spec, 1, GRID)


def test_target_moments_average_and_name_flat_curves():
    b = make_basis((0.0, 1.0), 12)
    t = np.linspace(0, 1, 80)
    curves = [Curve(f"c{i}", t, two_bumps(t - 0.05 * i)) for i in range(3)]
    specs = parse_features("max:r=100,min:r=100")
    tm = target_moments(curves, specs, b)
    eng = AmplitudeMoments(b, specs)
    from momalign.spline_core import smooth_fit
    each = [eng.evaluate(smooth_fit(c, b)) for c in curves]
    assert np.allclose(tm.values, np.mean(each, axis=0))
    assert tm[(1, 1)] == tm.values[1]
    with pytest.raises(FlatCurveError, match="'dead'"):
        target_moments(curves + [Curve("dead", t, np.zeros_like(t))], specs, b)


@pytest.mark.parametrize("text", ["max:r=100", "min:r=20:k=1|2", "local:r=100", "deriv:m=1",
                                  "deriv:m=2:k=1|2|3"])
def test_parse_feature_round_trip(text):
    ms = parse_feature(text)
    again = parse_feature(str(ms.feature) + ":k=" + "|".join(map(str, ms.orders)))
    assert again == ms


@pytest.mark.parametrize("text", ["", "peak", "max:q=3", "max:r=-1", "deriv:m=-1", "max:k=0",
                                  "max:k=1|1", "max:r"])
def test_parse_feature_rejects(text):
    with pytest.raises(ConfigError):
        parse_feature(text)


def test_orders_needed():
    assert FeatureSpec("max").orders_needed == (0,)
    assert FeatureSpec("local").orders_needed == (1, 2)
    assert FeatureSpec("deriv", m=2).orders_needed == (2,)
    with pytest.raises(ConfigError):
        MomentSpec(FeatureSpec("max"), ())


@pytest.mark.parametrize("text", ["max:r=100:k=1|2|3", "min:r=30:k=1|2", "local:r=3:k=1|2",
                                  "deriv:m=0:k=1|2", "deriv:m=1:k=1|2", "deriv:m=2"])
def test_jacobian_matches_finite_differences(text, rng):
    b = make_basis((0.0, 1.0), 10)
    eng = AmplitudeMoments(b, [parse_feature(text)])
    t = np.linspace(0, 1, 60)
    theta = np.linalg.lstsq(basis_matrix(b, t), two_bumps(t), rcond=None)[0]
    theta += rng.normal(scale=0.02, size=10)
    vals, J = eng.evaluate(theta, jac=True)
    h = 1e-6
    for j in range(10):
        e = np.zeros(10)
        e[j] = h
        fd = (eng.evaluate(theta + e) - eng.evaluate(theta - e)) / (2 * h)
        assert np.allclose(fd, J[:, j], rtol=1e-4, atol=1e-7)


def test_amplitude_moments_reject_orders_beyond_degree():
    with pytest.raises(ConfigError):
        AmplitudeMoments(make_basis((0, 1), 6, degree=1), [parse_feature("local")])
