"""Comparison methods: landmark registration and continuous monotone
registration toward the cross-sectional mean.

Both return a :class:`~momalign.registration.FitResult` so that the same
metrics apply to every method.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import ConfigError, DegenerateLandmarkError, LandmarkOrderError
from .objective import CurveParams
from .registration import FitConfig, assemble_result, register, with_lambdas
from .spline_core import basis_matrix, fit_coefficients, make_basis, quad_grid, smooth_fit
from .warp import WarpModel, WarpPlan, identity_warp

EVENTS = ("global_max", "global_min")
PROJECTION_RIDGE = 1e-8


@dataclass(frozen=True)
class LandmarkSpec:
    events: tuple = ("global_max",)
    roughness: float = 1e-7
    amp_dim: int = 20

    def __post_init__(self):
        events = tuple(self.events)
        if not events:
            raise ConfigError("a landmark spec needs at least one event")
        bad = [e for e in events if e not in EVENTS]
        if bad:
            raise ConfigError(f"unknown landmark events {bad}; choose from {EVENTS}")
        object.__setattr__(self, "events", events)


def landmark_detect(curve, spec, domain=None):
    """Event times of the smoothed curve, in the order given by ``spec``.

    The smoothed curve is scanned on the shared fine quadrature grid; the
    first grid point attaining the extreme wins.
    """
    domain = (0.0, float(curve.times[-1])) if domain is None else domain
    basis = make_basis(domain, spec.amp_dim)
    theta = smooth_fit(curve, basis, spec.roughness)
    grid = quad_grid(domain)
    g = basis_matrix(basis, grid) @ theta
    times = np.array([grid[np.argmax(g)] if e == "global_max" else grid[np.argmin(g)]
                      for e in spec.events])
    if np.any(np.diff(times) <= 0):
        order = ", ".join(f"{e}={t:.4g}" for e, t in zip(spec.events, times))
        raise LandmarkOrderError(f"detected events are not in the requested order ({order})",
                                 curve.id)
    return times


def _affine_map(events, target, curve_id):
    if len(events) == 1:
        return float(target[0] - events[0]), 1.0
    beta, alpha = np.polyfit(events, target, 1)
    if beta <= 0:
        raise DegenerateLandmarkError(f"affine landmark map has slope {beta:.3g}", curve_id)
    return float(alpha), float(beta)


def _piecewise_target(events, target, T, curve_id):
    xs = np.concatenate([[0.0], events, [T]])
    ys = np.concatenate([[0.0], target, [T]])
    inner = (xs > 0) & (xs < T)
    inner[[0, -1]] = True
    xs, ys = xs[inner], ys[inner]
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise DegenerateLandmarkError("events cannot be mapped by an increasing warp", curve_id)
    return xs, ys


def _project_standardized(xs, ys, template, grid):
    """Least-squares fit of a standardized warp to the piecewise-linear map."""
    plan = WarpPlan("standardized", template.domain, template.basis, grid)
    target = np.interp(grid, xs, ys)
    # W ignores constant shifts of gamma; the ridge pins that direction
    ridge = np.sqrt(PROJECTION_RIDGE) * np.eye(template.n_params)

    def resid(g):
        W = plan.evaluate(template.with_params(g), with_grad=False).W
        return np.concatenate([W - target, ridge @ g])

    def jac(g):
        return np.vstack([plan.evaluate(template.with_params(g)).dW, ridge])

    fit = least_squares(resid, np.zeros(template.n_params), jac=jac, method="lm")
    return template.with_params(fit.x)


def landmark_register(data, spec, family="linear", config=None):
    """Map every curve's events onto the cross-curve mean event times.

    ``linear`` uses the least-squares affine map (a pure shift for a single
    event). ``standardized`` projects the increasing piecewise-linear map
    through ``(0, 0)``, the events and ``(T, T)`` into the warp family.
    Amplitude coefficients are then fitted to ``Y_i`` against the warped
    times.
    """
    if family not in ("linear", "standardized"):
        raise ConfigError("landmark registration supports linear or standardized warps")
    config = FitConfig(warp_family=family) if config is None else replace(config,
                                                                          warp_family=family)
    amp, wbasis = config.bases(data)
    T = amp.domain[1]
    events = np.array([landmark_detect(c, spec, amp.domain) for c in data])
    target = events.mean(axis=0)
    template = identity_warp(family, amp.domain, wbasis)
    grid = quad_grid(amp.domain, 201)
    params, smooth_thetas = [], []
    for c, ev in zip(data, events):
        if family == "linear":
            alpha, beta = _affine_map(ev, target, c.id)
            warp = WarpModel("linear", amp.domain, alpha=alpha, beta=beta)
        else:
            xs, ys = _piecewise_target(ev, target, T, c.id)
            warp = _project_standardized(xs, ys, template, grid)
        W = WarpPlan(family, amp.domain, wbasis, c.times).evaluate(warp, with_grad=False).W
        theta = fit_coefficients(np.clip(W, *amp.domain), c.values, amp, config.roughness, c.id)
        params.append(CurveParams(theta, warp))
        smooth_thetas.append(smooth_fit(c, amp, config.roughness))
    mu = np.mean([p.theta for p in params], axis=0)
    notes = [f"events={','.join(spec.events)}",
             "mean event times=" + ",".join(repr(float(t)) for t in target)]
    return assemble_result("landmark", data, params, mu, smooth_thetas, amp, config, [], True,
                           notes=notes)


def cmr_register(data, config):
    """Continuous monotone registration: no moment term and ``mu_theta``
    frozen at the smoothed cross-sectional mean."""
    cfg = replace(with_lambdas(config, mom=0.0), specs=())
    return register(data, cfg, freeze_mu=True, method="cmr")
