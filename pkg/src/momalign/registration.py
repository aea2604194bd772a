"""Moment-based registration by block-coordinate descent.

Each outer iteration minimizes every curve's criterion over its own
``(theta_i, warp_i)`` with ``mu_theta`` held fixed, then resets ``mu_theta`` to
the mean of the ``theta_i``. Target moments are computed once from the
smoothed observed curves and never updated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DimensionMismatchError, UndefinedSyncError
from .feature_moments import AmplitudeMoments, MomentVector, target_moments
from .metrics import sigma_metric, sync_metric
from .objective import CurveObjective, CurveParams, Lambdas
from .optim import bfgs
from .spline_core import basis_matrix, make_basis, smooth_fit
from .warp import FAMILIES, WarpPlan, identity_warp

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnealSchedule:
    """Early outer iterations run with a heavier moment penalty and lighter
    shrinkage before switching to the configured weights."""

    phase1_iters: int = 3
    mom_mult: float = 10.0
    sync_mult: float = 0.1

    def lambdas(self, base, outer_iter):
        if outer_iter < self.phase1_iters:
            return base.scaled(sync=self.sync_mult, mom=self.mom_mult)
        return base


@dataclass(frozen=True)
class FitConfig:
    lambdas: Lambdas = field(default_factory=Lambdas)
    specs: tuple = ()
    warp_family: str = "standardized"
    amp_dim: int = 20
    warp_dim: int = 4
    degree: int = 3
    T: float | None = None
    roughness: float = 1e-7
    max_outer_iters: int = 50
    outer_tol: float = 1e-6
    inner_max_iters: int = 200
    inner_gtol: float = 1e-8
    inner_ftol: float = 1e-12
    anneal: AnnealSchedule | None = None
    mean_restart: bool = True
    output_points: int = 201

    def __post_init__(self):
        if self.warp_family not in FAMILIES:
            raise ConfigError(f"unknown warp family {self.warp_family!r}")
        if self.outer_tol <= 0 or self.inner_gtol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.max_outer_iters < 1 or self.inner_max_iters < 1:
            raise ConfigError("iteration caps must be at least 1")
        object.__setattr__(self, "specs", tuple(self.specs))

    def domain(self, data):
        lo = min(float(c.times[0]) for c in data)
        if lo < 0:
            raise ConfigError("curve times must lie in [0, T]")
        T = max(float(c.times[-1]) for c in data) if self.T is None else float(self.T)
        if any(c.times[-1] > T for c in data):
            raise ConfigError(f"curve times exceed T = {T}")
        return (0.0, T)

    def bases(self, data):
        dom = self.domain(data)
        amp = make_basis(dom, self.amp_dim, self.degree)
        warp = make_basis(dom, self.warp_dim, self.degree) if self.warp_family in (
            "free", "standardized") else None
        return amp, warp


@dataclass(eq=False)
class FitResult:
    method: str
    curve_ids: list
    params: list
    mu_theta: np.ndarray
    grid: np.ndarray
    synchronized: np.ndarray
    warps: np.ndarray
    smoothed: np.ndarray
    fitted: list
    metrics: dict
    trace: list
    converged: bool
    lambdas: Lambdas
    targets: MomentVector | None = None
    notes: list = field(default_factory=list)


def initialize(data, config):
    """Smoothed starting coefficients, identity warps, their mean and the targets."""
    if not data:
        raise ValueError("need at least one curve")
    amp, wbasis = config.bases(data)
    thetas = [smooth_fit(c, amp, config.roughness) for c in data]
    template = identity_warp(config.warp_family, amp.domain, wbasis)
    params = [CurveParams(th, template) for th in thetas]
    mu = np.mean(thetas, axis=0)
    targets = target_moments(data, config.specs, amp, config.roughness) if config.specs else None
    return params, mu, targets


def _objective(curve, config, amp, template, engine):
    return CurveObjective(curve, amp, template, engine)


def _minimize(obj, x0, mu, targets, lambdas, config):
    def fg(x):
        ev = obj.evaluate(x, mu, targets, lambdas)
        return ev.value, ev.grad

    return bfgs(fg, x0, max_iter=config.inner_max_iters, gtol=config.inner_gtol,
                ftol=config.inner_ftol)


def fit_single_curve(curve, mu_theta, targets, config, warm_start, basis=None):
    """Minimize one curve's criterion from ``warm_start`` with ``mu_theta`` fixed.

    Returns ``(CurveParams, OptimizeResult)``.
    """
    amp = basis if basis is not None else make_basis(
        warm_start.warp.domain, len(warm_start.theta), config.degree)
    engine = AmplitudeMoments(amp, config.specs) if config.specs else None
    obj = CurveObjective(curve, amp, warm_start.warp, engine)
    res = _minimize(obj, warm_start.vector(), mu_theta, targets, config.lambdas, config)
    return warm_start.with_vector(res.x), res


def register(data, config, init=None, freeze_mu=False, method="moments"):
    """Fit the registration model to a list of curves.

    ``init`` optionally supplies ``(params, mu_theta)`` warm starts; the
    targets always come from the observed curves.
    """
    if not data:
        raise ValueError("need at least one curve")
    amp, wbasis = config.bases(data)
    start_params, start_mu, targets = initialize(data, config)
    smooth_thetas = [p.theta for p in start_params]
    if init is not None:
        start_params, start_mu = init
        if len(start_params) != len(data):
            raise DimensionMismatchError("warm start does not match the number of curves")
    engine = AmplitudeMoments(amp, config.specs) if config.specs else None
    template = start_params[0].warp
    ident = identity_warp(config.warp_family, amp.domain, wbasis)
    objs = [_objective(c, config, amp, template, engine) for c in data]
    xs = [p.vector() for p in start_params]
    mu = np.array(start_mu, dtype=float)

    def total(lams):
        return float(np.mean([obj.evaluate(x, mu, targets, lams, with_grad=False).value
                              for obj, x in zip(objs, xs)]))

    trace = []
    converged = False
    prev, prev_lams = None, None
    for it in range(config.max_outer_iters):
        lams = config.anneal.lambdas(config.lambdas, it) if config.anneal else config.lambdas
        if lams != prev_lams:
            prev = total(lams)
        restart = np.concatenate([mu, ident.params()]) if config.mean_restart else None
        for i, obj in enumerate(objs):
            res = _minimize(obj, xs[i], mu, targets, lams, config)
            if restart is not None:
                # second start at the current mean shape with an identity warp;
                # escapes minima where theta absorbed the misalignment
                alt = _minimize(obj, restart, mu, targets, lams, config)
                if alt.fun < res.fun:
                    res = alt
            xs[i] = res.x
        if not freeze_mu:
            mu = np.mean([x[: amp.dimension] for x in xs], axis=0)
        q = total(lams)
        trace.append(q)
        log.debug("outer iteration %d: Q = %.10g", it, q)
        change = abs(prev - q) / max(abs(prev), 1e-300)
        if lams == config.lambdas and change < config.outer_tol:
            converged = True
            break
        prev, prev_lams = q, lams

    params = [start_params[i].with_vector(xs[i]) for i in range(len(data))]
    return assemble_result(method, data, params, mu, smooth_thetas, amp, config, trace,
                           converged, targets)


def _sync_or_nan(smoothed, synchronized):
    try:
        return sync_metric(smoothed, synchronized)
    except UndefinedSyncError:
        # identical inputs that stay identical are perfectly synchronized
        if len(synchronized) >= 2 and np.ptp(synchronized, axis=0).max() < 1e-7:
            return 0.0
        return float("nan")


def assemble_result(method, data, params, mu, smooth_thetas, amp, config, trace, converged,
                    targets=None, notes=None):
    grid = np.linspace(amp.domain[0], amp.domain[1], config.output_points)
    B = basis_matrix(amp, grid)
    synchronized = np.array([B @ p.theta for p in params])
    smoothed = np.array([B @ th for th in smooth_thetas])
    warps, fitted, pens, presmooth = [], [], [], []
    for p, c, th in zip(params, data, smooth_thetas):
        plan = WarpPlan(p.warp.family, amp.domain, p.warp.basis, grid)
        warps.append(plan.evaluate(p.warp, with_grad=False).W)
        cplan = WarpPlan(p.warp.family, amp.domain, p.warp.basis, c.times)
        st = cplan.evaluate(p.warp, with_grad=False)
        fitted.append(basis_matrix(amp, np.clip(st.W, *amp.domain)) @ p.theta)
        pens.append(st.penalty)
        presmooth.append(basis_matrix(amp, c.times) @ th)
    metrics = {
        "sync": _sync_or_nan(smoothed, synchronized),
        "sigma": sigma_metric([c.values for c in data], fitted),
        "mean_pw": float(np.mean(pens)),
        # residual of the smoothing step alone; landmark sigma is usually quoted this way
        "sigma_presmooth": sigma_metric([c.values for c in data], presmooth),
    }
    return FitResult(method, [c.id for c in data], params, np.asarray(mu), grid, synchronized,
                     np.array(warps), smoothed, fitted, metrics, list(trace), converged,
                     config.lambdas, targets, list(notes or []))


def with_lambdas(config, sync=None, mom=None, w=None):
    lam = config.lambdas
    return replace(config, lambdas=Lambdas(lam.sync if sync is None else sync,
                                           lam.mom if mom is None else mom,
                                           lam.w if w is None else w))
