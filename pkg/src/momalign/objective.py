"""The penalized registration criterion and its analytic gradient.

For curve ``i`` with amplitude coefficients ``theta`` and warp ``W``::

    E_i = ||Y_i - z(W(t))' theta||^2
          + lam_sync * ||theta - mu_theta||^2
          + lam_mom  * sum_{l,k} (mu_Z^(l,k) - target^(l,k))^2
          + lam_w    * (int (1/W' - 1) dt)^2

and ``Q = mean_i E_i``. Warped times outside ``[0, T]`` are clamped before the
amplitude basis is evaluated; clamped observations contribute no warp gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatchError, FlatCurveError
from .feature_moments import AmplitudeMoments
from .spline_core import basis_matrix
from .warp import WarpModel, WarpPlan


@dataclass(frozen=True)
class Lambdas:
    sync: float = 0.0
    mom: float = 0.0
    w: float = 0.0

    def __post_init__(self):
        for name in ("sync", "mom", "w"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ConfigError(f"lambda_{name} must be finite and non-negative")

    def scaled(self, sync=1.0, mom=1.0, w=1.0):
        return Lambdas(self.sync * sync, self.mom * mom, self.w * w)


@dataclass(frozen=True, eq=False)
class CurveParams:
    theta: np.ndarray
    warp: WarpModel

    def vector(self):
        return np.concatenate([self.theta, self.warp.params()])

    def with_vector(self, x):
        p = len(self.theta)
        return CurveParams(np.array(x[:p], dtype=float), self.warp.with_params(x[p:]))


@dataclass(frozen=True)
class ObjectiveTerms:
    """Curve-averaged raw terms (unweighted penalties) and the weighted total."""

    fit: float
    sync: float
    mom: float
    warp: float
    total: float


@dataclass
class CurveEvaluation:
    value: float
    grad: np.ndarray | None
    fit: float
    sync: float
    mom: float
    warp: float
    fitted: np.ndarray


class CurveObjective:
    """Curve ``i``'s contribution ``E_i`` with everything that depends only on
    the curve's sampling times precomputed."""

    def __init__(self, curve, basis, warp_template, moments=None):
        if warp_template.domain != basis.domain:
            raise DimensionMismatchError("warp and amplitude bases must share the domain")
        self.curve = curve
        self.basis = basis
        self.template = warp_template
        self.plan = WarpPlan(warp_template.family, basis.domain, warp_template.basis, curve.times)
        self.moments = moments
        self.p = basis.dimension

    def split(self, x):
        return x[: self.p], self.template.with_params(x[self.p:])

    def evaluate(self, x, mu_theta, targets, lambdas, with_grad=True, all_terms=False):
        theta, warp = self.split(np.asarray(x, dtype=float))
        ws = self.plan.evaluate(warp, with_grad=with_grad)
        lo, hi = self.basis.domain
        Wc = np.clip(ws.W, lo, hi)
        inside = Wc == ws.W
        B = basis_matrix(self.basis, Wc)
        fitted = B @ theta
        resid = self.curve.values - fitted
        fit = float(resid @ resid)

        d = theta - mu_theta
        sync = float(d @ d)

        mom, J, diff = 0.0, None, None
        if self.moments is not None and (lambdas.mom > 0 or all_terms):
            try:
                if with_grad and lambdas.mom > 0:
                    vals, J = self.moments.evaluate(theta, jac=True)
                else:
                    vals = self.moments.evaluate(theta)
            except FlatCurveError as exc:
                raise FlatCurveError(str(exc), self.curve.id) from exc
            diff = vals - targets.values
            mom = float(diff @ diff)

        value = fit + lambdas.sync * sync + lambdas.mom * mom + lambdas.w * ws.penalty
        grad = None
        if with_grad:
            g_theta = -2.0 * (B.T @ resid) + 2.0 * lambdas.sync * d
            if J is not None:
                g_theta = g_theta + 2.0 * lambdas.mom * (J.T @ diff)
            if ws.dW.shape[1]:
                slope = basis_matrix(self.basis, Wc, 1) @ theta
                coef = np.where(inside, -2.0 * resid * slope, 0.0)
                g_warp = coef @ ws.dW + lambdas.w * ws.dpenalty
            else:
                g_warp = np.zeros(0)
            grad = np.concatenate([g_theta, g_warp])
        return CurveEvaluation(value, grad, fit, sync, mom, ws.penalty, fitted)


def _moment_engine(basis, specs):
    return AmplitudeMoments(basis, specs) if specs else None


def fitted_values(params, curve, basis):
    """``z(W(t_j))' theta`` at the curve's sampling times (warped times clamped)."""
    plan = WarpPlan(params.warp.family, basis.domain, params.warp.basis, curve.times)
    W = plan.evaluate(params.warp, with_grad=False).W
    return basis_matrix(basis, np.clip(W, *basis.domain)) @ params.theta


def _check(params_all, data):
    if len(params_all) != len(data):
        raise DimensionMismatchError(
            f"{len(params_all)} parameter sets for {len(data)} curves")


def objective_terms(params_all, data, mu_theta, targets, specs, lambdas, basis):
    """Curve-averaged terms of the criterion and its weighted total ``Q``."""
    _check(params_all, data)
    engine = _moment_engine(basis, specs)
    if engine is not None and len(targets.values) != len(engine.index):
        raise DimensionMismatchError("targets were computed from different moment specs")
    acc = np.zeros(4)
    for params, curve in zip(params_all, data):
        if len(params.theta) != basis.dimension or len(mu_theta) != basis.dimension:
            raise DimensionMismatchError("theta length must equal the amplitude dimension",
                                         curve.id)
        obj = CurveObjective(curve, basis, params.warp, engine)
        ev = obj.evaluate(params.vector(), mu_theta, targets, lambdas, with_grad=False,
                          all_terms=True)
        acc += (ev.fit, ev.sync, ev.mom, ev.warp)
    fit, sync, mom, warp = acc / len(data)
    total = fit + lambdas.sync * sync + lambdas.mom * mom + lambdas.w * warp
    return ObjectiveTerms(fit, sync, mom, warp, total)


def objective_gradient(params, curve, mu_theta, targets, specs, lambdas, basis):
    """Gradient of curve ``i``'s bracketed contribution over ``(theta, warp params)``."""
    obj = CurveObjective(curve, basis, params.warp, _moment_engine(basis, specs))
    return obj.evaluate(params.vector(), mu_theta, targets, lambdas).grad
