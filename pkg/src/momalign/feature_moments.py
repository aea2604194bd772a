"""Feature functions and time-axis moments of a curve.

A feature function turns a curve ``g`` into a non-negative weight function on
the time axis that integrates to one. Its first moment locates the feature in
time and the central moments describe its spread. Four kinds are provided:

``max``    weight ``(g - min g)^r``, concentrating on the global maximum
``min``    weight ``(max g - g)^r``, concentrating on the global minimum
``local``  weight ``exp(-r |g'| / sqrt|g''|)``, zero where ``g'' = 0``
``deriv``  weight ``|g^(m)|``

All integrals are composite trapezoid sums on the supplied grid.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FlatCurveError
from .spline_core import basis_matrix, quad_grid, smooth_fit, trapezoid_weights

KINDS = ("max", "min", "local", "deriv")
LOCAL_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureSpec:
    kind: str
    r: float = 100.0
    m: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        if not self.r > 0:
            raise ConfigError("sharpness r must be positive")
        if self.m < 0:
            raise ConfigError("derivative order m must be non-negative")

    @property
    def orders_needed(self):
        """Derivative orders of the curve that the weights depend on."""
        if self.kind in ("max", "min"):
            return (0,)
        if self.kind == "local":
            return (1, 2)
        return (self.m,)

    def __str__(self):
        if self.kind == "deriv":
            return f"deriv:m={self.m}"
        return f"{self.kind}:r={self.r:g}"


@dataclass(frozen=True)
class MomentSpec:
    feature: FeatureSpec
    orders: tuple = (1,)

    def __post_init__(self):
        orders = tuple(int(k) for k in self.orders)
        if not orders or len(set(orders)) != len(orders) or min(orders) < 1:
            raise ConfigError("moment orders must be distinct positive integers")
        object.__setattr__(self, "orders", orders)


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Flat moment values indexed by ``(feature index l, order k)`` pairs."""

    values: np.ndarray
    index: tuple

    def __getitem__(self, lk):
        return self.values[self.index.index(lk)]


def parse_feature(text):
    """Parse ``"max:r=100"``, ``"min"``, ``"local:r=50"`` or ``"deriv:m=1"``.

    An optional ``k=1|2`` entry selects moment orders, e.g. ``"deriv:m=1:k=1|2"``.
    Returns a :class:`MomentSpec`.
    """
    parts = [p.strip() for p in text.strip().split(":") if p.strip()]
    if not parts:
        raise ConfigError("empty feature specification")
    kind, opts = parts[0], {}
    for part in parts[1:]:
        m = re.fullmatch(r"([a-z]+)\s*=\s*([^\s]+)", part)
        if not m:
            raise ConfigError(f"cannot parse feature option {part!r}")
        opts[m.group(1)] = m.group(2)
    unknown = set(opts) - {"r", "m", "k"}
    if unknown:
        raise ConfigError(f"unknown feature options {sorted(unknown)}")
    orders = tuple(int(k) for k in opts.get("k", "1").split("|"))
    feature = FeatureSpec(kind, float(opts.get("r", 100.0)), int(opts.get("m", 0)))
    return MomentSpec(feature, orders)


def parse_features(text):
    return [parse_feature(item) for item in text.split(",") if item.strip()]


class _Density:
    """Normalized feature weights on a grid plus their log-derivative structure."""

    def __init__(self, spec, values, tw):
        self.spec = spec
        kind, r = spec.kind, spec.r
        if kind in ("max", "min"):
            g = values[0]
            rng = g.max() - g.min()
            if not rng > 0:
                raise FlatCurveError(f"curve is flat; '{kind}' feature has no mass")
            eps = 1e-12 * rng
            if kind == "max":
                self.anchor = int(np.argmin(g))
                u = g - g[self.anchor] + eps
            else:
                self.anchor = int(np.argmax(g))
                u = g[self.anchor] - g + eps
            self.u = u
            logw = r * np.log(u)
            w = np.exp(logw - logw.max())
        elif kind == "deriv":
            v = values[spec.m]
            w = np.abs(v)
            self.v = v
            if not np.any(w > 0):
                raise FlatCurveError(f"derivative of order {spec.m} vanishes identically")
        else:
            g1, g2 = values[1], values[2]
            a2 = np.abs(g2)
            scale = a2.max()
            if not scale > 0:
                raise FlatCurveError("second derivative vanishes identically")
            self.thresh = LOCAL_FLOOR * scale
            self.live = g2 != 0
            self.q = np.maximum(a2, self.thresh)
            self.g1, self.g2 = g1, g2
            logw = np.where(self.live, -r * np.abs(g1) / np.sqrt(self.q), -np.inf)
            w = np.exp(logw - logw[self.live].max())
        mass = tw @ w
        if not (mass > 0 and np.isfinite(mass)):
            raise FlatCurveError(f"'{kind}' feature weights have no mass")
        self.I = w / mass

    def vjp(self, a, mats):
        """``sum_g a_g * d log(raw weight_g) / d theta`` for weights of ``z(t)' theta``."""
        kind, r = self.spec.kind, self.spec.r
        if kind in ("max", "min"):
            B0 = mats[0]
            s = a / self.u
            out = B0.T @ s - B0[self.anchor] * s.sum()
            return r * out if kind == "max" else -r * out
        if kind == "deriv":
            rho = np.zeros_like(self.v)
            nz = self.v != 0
            rho[nz] = a[nz] / self.v[nz]
            return mats[self.spec.m].T @ rho
        live = self.live
        a = np.where(live, a, 0.0)
        c1 = -r * np.sign(self.g1) / np.sqrt(self.q)
        c2 = np.where(np.abs(self.g2) >= self.thresh,
                      0.5 * r * np.abs(self.g1) * np.sign(self.g2) * self.q ** -1.5, 0.0)
        return mats[1].T @ (a * c1) + mats[2].T @ (a * c2)


def _moments_from_density(I, grid, tw, orders):
    c = tw * I
    mu1 = c @ grid
    d = grid - mu1
    out = []
    for k in orders:
        out.append(mu1 if k == 1 else c @ d ** k)
    return np.array(out), c, d, mu1


def _moment_jacobian(dens, c, d, values, orders, mats):
    rows = []
    for k, mu_k in zip(orders, values):
        if k == 1:
            a = c * d
        else:
            lower = c @ d ** (k - 1)
            a = c * (d ** k - mu_k - k * lower * d)
        rows.append(dens.vjp(a, mats))
    return np.array(rows)


def _sample(fn, spec, grid):
    return {order: np.asarray(fn(grid, order), dtype=float) for order in spec.orders_needed}


def feature_weights(fn, spec, grid):
    """Normalized feature weights of ``fn`` on ``grid``.

    ``fn(t, deriv)`` must return the ``deriv``-th derivative of the curve at
    the times ``t``.
    """
    grid = np.asarray(grid, dtype=float)
    return _Density(spec, _sample(fn, spec, grid), trapezoid_weights(grid)).I


def moments(fn, spec, orders, grid):
    """First moment (k=1) and central moments (k>=2) of ``fn`` under ``spec``."""
    grid = np.asarray(grid, dtype=float)
    tw = trapezoid_weights(grid)
    dens = _Density(spec, _sample(fn, spec, grid), tw)
    return _moments_from_density(dens.I, grid, tw, orders)[0]


def moment(fn, spec, k, grid):
    return float(moments(fn, spec, (k,), grid)[0])


def moment_index(specs):
    return tuple((l, k) for l, ms in enumerate(specs) for k in ms.orders)


class AmplitudeMoments:
    """Moments of amplitude functions ``z(t)' theta`` with analytic Jacobians.

    Basis matrices on the grid are computed once and reused for every theta.
    """

    def __init__(self, basis, specs, grid=None):
        self.basis = basis
        self.specs = list(specs)
        self.grid = quad_grid(basis.domain) if grid is None else np.asarray(grid, dtype=float)
        self.tw = trapezoid_weights(self.grid)
        needed = {o for ms in self.specs for o in ms.feature.orders_needed}
        for o in needed:
            if o > basis.degree:
                raise ConfigError(f"derivative order {o} exceeds the amplitude basis degree")
        self.mats = {o: basis_matrix(basis, self.grid, o) for o in needed}
        self.index = moment_index(self.specs)

    def evaluate(self, theta, jac=False):
        values = {o: B @ theta for o, B in self.mats.items()}
        out, rows = [], []
        for ms in self.specs:
            dens = _Density(ms.feature, values, self.tw)
            mom, c, d, _ = _moments_from_density(dens.I, self.grid, self.tw, ms.orders)
            out.append(mom)
            if jac:
                rows.append(_moment_jacobian(dens, c, d, mom, ms.orders, self.mats))
        vals = np.concatenate(out) if out else np.zeros(0)
        if not jac:
            return vals
        J = np.vstack(rows) if rows else np.zeros((0, self.basis.dimension))
        return vals, J


def target_moments(curves, specs, basis, roughness=0.0, grid=None):
    """Across-curve mean of the moments of each smoothed observed curve."""
    engine = AmplitudeMoments(basis, specs, grid)
    per_curve = []
    for curve in curves:
        theta = smooth_fit(curve, basis, roughness)
        try:
            per_curve.append(engine.evaluate(theta))
        except FlatCurveError as exc:
            raise FlatCurveError(str(exc), curve.id) from exc
    if not per_curve:
        raise ValueError("target moments need at least one curve")
    return MomentVector(np.mean(per_curve, axis=0), engine.index)
