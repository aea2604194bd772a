import hashlib
from dataclasses import replace

import numpy as np
import pytest

from momalign.errors import ConfigError, FlatCurveError
from momalign.feature_moments import parse_features
from momalign.objective import CurveObjective, CurveParams, Lambdas
from momalign.registration import (AnnealSchedule, FitConfig, fit_single_curve, initialize,
                                   register, with_lambdas)
from momalign.spline_core import Curve, basis_matrix, make_basis, smooth_fit
from momalign.warp import identity_warp

from conftest import two_bumps

T = np.linspace(0, 1, 40)
SPECS = tuple(parse_features("max:r=100,min:r=100"))
SMALL = FitConfig(Lambdas(0.5, 1e3, 0.1), SPECS, "standardized", amp_dim=10, warp_dim=4,
                  max_outer_iters=4, inner_max_iters=60)


def shifted(shifts):
    return [Curve(f"c{i}", T, two_bumps(T - s)) for i, s in enumerate(shifts)]


def test_initialize_identity_warps_mean_and_targets():
    data = shifted([0.0, 0.03, -0.03])
    params, mu, targets = initialize(data, SMALL)
    amp, _ = SMALL.bases(data)
    assert all(np.allclose(p.warp.params(), 0) for p in params)
    assert np.array_equal(mu, np.mean([p.theta for p in params], axis=0))
    assert np.allclose(params[1].theta, smooth_fit(data[1], amp, SMALL.roughness))
    assert len(targets.values) == 2


def test_identical_curves_start_synchronized():
    params, mu, _ = initialize(shifted([0.0, 0.0]), SMALL)
    assert np.allclose(params[0].theta, mu)


def test_single_curve_mean_is_its_own_theta():
    params, mu, _ = initialize(shifted([0.0]), SMALL)
    assert np.array_equal(mu, params[0].theta)
    res = register(shifted([0.0]), SMALL)
    assert np.isnan(res.metrics["sync"]) and np.isfinite(res.metrics["sigma"])


def test_unpenalized_identity_fit_is_least_squares():
    data = shifted([0.05])
    cfg = FitConfig(Lambdas(), (), "identity", amp_dim=10, roughness=0.0)
    amp, _ = cfg.bases(data)
    params, mu, targets = initialize(data, cfg)
    start = CurveParams(np.zeros(10), params[0].warp)
    p, res = fit_single_curve(data[0], mu, targets, cfg, start, amp)
    assert np.allclose(p.theta, smooth_fit(data[0], amp, 0.0), atol=1e-6)


def test_linear_warp_recovers_a_shift():
    # target shape already in mu; the curve is that shape delayed by 0.1
    cfg = FitConfig(Lambdas(1.0, 0.0, 0.0), (), "linear", amp_dim=15, inner_max_iters=300)
    amp = make_basis((0.0, 1.0), 15)
    grid = np.linspace(0, 1, 400)
    mu = np.linalg.lstsq(basis_matrix(amp, grid), two_bumps(grid), rcond=None)[0]
    curve = Curve("late", T, two_bumps(T - 0.1))
    start = CurveParams(mu.copy(), identity_warp("linear", (0.0, 1.0)))
    p, _ = fit_single_curve(curve, mu, None, cfg, start, amp)
    # W(t) = t - 0.1 maps the delayed curve onto the target frame
    assert p.warp.alpha == pytest.approx(-0.1, abs=0.02)
    assert p.warp.beta == pytest.approx(1.0, abs=0.05)


def test_fit_single_curve_never_worsens_the_warm_start():
    data = shifted([0.0, 0.04, -0.04])
    params, mu, targets = initialize(data, SMALL)
    amp, _ = SMALL.bases(data)
    from momalign.feature_moments import AmplitudeMoments
    obj = CurveObjective(data[1], amp, params[1].warp, AmplitudeMoments(amp, SPECS))
    before = obj.evaluate(params[1].vector(), mu, targets, SMALL.lambdas, with_grad=False).value
    p, res = fit_single_curve(data[1], mu, targets, SMALL, params[1], amp)
    assert res.fun <= before
    assert obj.evaluate(p.vector(), mu, targets, SMALL.lambdas, with_grad=False).value == res.fun


@pytest.fixture(scope="module")
def small_fit():
    data = shifted([0.0, 0.04, -0.04, 0.02])
    return data, register(data, SMALL)


def test_register_synchronizes_and_reports(small_fit):
    data, res = small_fit
    assert res.metrics["sync"] < 10
    assert res.synchronized.shape == (4, SMALL.output_points)
    assert res.warps.shape == (4, SMALL.output_points)
    assert np.all(np.diff(res.warps, axis=1) > 0)
    assert all(np.isfinite(v) for v in res.metrics.values())


def test_outer_trace_descends(small_fit):
    _, res = small_fit
    trace = np.array(res.trace)
    assert np.all(np.diff(trace) <= 1e-8 * len(res.params[0].vector()))


def test_mu_is_exact_mean_of_thetas(small_fit):
    _, res = small_fit
    assert np.array_equal(res.mu_theta, np.mean([p.theta for p in res.params], axis=0))


def test_register_is_deterministic(small_fit):
    data, res = small_fit
    again = register(data, SMALL)
    digest = lambda r: hashlib.sha256(r.synchronized.tobytes() + r.warps.tobytes()).hexdigest()  # noqa: E731
    assert digest(res) == digest(again) and res.trace == again.trace


def test_targets_never_change():
    data = shifted([0.0, 0.05, -0.05])
    _, _, t0 = initialize(data, SMALL)
    res = register(data, replace(SMALL, anneal=AnnealSchedule(2, 10.0, 0.1)))
    assert np.array_equal(res.targets.values, t0.values)


def test_presynchronized_data_keep_identity_warps():
    data = [Curve(f"c{i}", T, (1 + 0.01 * i) * two_bumps(T)) for i in range(3)]
    res = register(data, with_lambdas(SMALL, 10.0, 1e3, 1.0))
    assert np.max(np.abs(res.warps - res.grid)) < 0.02
    assert res.metrics["mean_pw"] <= 1e-3


def test_frozen_mean_is_not_updated():
    data = shifted([0.0, 0.05])
    _, mu0, _ = initialize(data, SMALL)
    res = register(data, replace(SMALL, max_outer_iters=2), freeze_mu=True)
    assert np.array_equal(res.mu_theta, mu0)


def test_anneal_schedule():
    sched = AnnealSchedule(2, 10.0, 0.1)
    base = Lambdas(1.0, 100.0, 3.0)
    assert sched.lambdas(base, 0) == Lambdas(0.1, 1000.0, 3.0)
    assert sched.lambdas(base, 2) == base


def test_flat_curve_aborts_with_its_id():
    data = shifted([0.0, 0.02]) + [Curve("flat", T, np.zeros_like(T))]
    with pytest.raises(FlatCurveError, match="'flat'"):
        register(data, SMALL)


def test_config_validation():
    with pytest.raises(ConfigError):
        FitConfig(warp_family="cubic")
    with pytest.raises(ConfigError):
        FitConfig(outer_tol=0)
    with pytest.raises(ConfigError):
        FitConfig(max_outer_iters=0)
    with pytest.raises(ConfigError):
        SMALL.domain([Curve("neg", [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])])
