"""Strictly increasing time warps and the shape-distortion penalty.

A warp maps observation time ``t`` onto the common (synchronized) time axis.
Four families are supported:

``identity``      ``W(t) = t``
``linear``        ``W(t) = alpha + beta * t`` with ``beta > 0``
``free``          ``W(t) = gamma0 + int_0^t exp(f(s)) ds``
``standardized``  ``W(t) = T * int_0^t exp(f) / int_0^T exp(f)``

where ``f = w(s)' gamma`` lives in a B-spline warp basis.

The integrals use composite 3-point Gauss-Legendre on cells spanning ten
steps of the shared quadrature grid; the slope guard is checked on every grid
point. A query time inside a cell gets its own 3-point rule on the
partial cell, so ``W`` is smooth in ``t`` and ``W'`` is its exact derivative up
to quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DegenerateWarpError, WarpOverflowError
from .spline_core import BasisSpec, basis_matrix, quad_points

FAMILIES = ("identity", "linear", "free", "standardized")
OVERFLOW_LIMIT = 700.0
DEGENERATE_SLOPE = 1e-12

_GL_NODES = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GL_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 9.0


@dataclass(frozen=True, eq=False)
class WarpModel:
    family: str
    domain: tuple
    basis: BasisSpec | None = None
    gamma0: float = 0.0
    gamma: np.ndarray | None = None
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown warp family {self.family!r}")
        if self.family == "linear" and not self.beta > 0:
            raise ConfigError("linear warp needs beta > 0")
        if self.family in ("free", "standardized"):
            if self.basis is None:
                raise ConfigError(f"{self.family} warp needs a warp basis")
            gamma = np.zeros(self.basis.dimension) if self.gamma is None else np.asarray(
                self.gamma, dtype=float)
            if gamma.shape != (self.basis.dimension,) or not np.all(np.isfinite(gamma)):
                raise ConfigError("gamma must be a finite vector matching the warp basis")
            object.__setattr__(self, "gamma", gamma)

    @property
    def T(self):
        return self.domain[1]

    @property
    def n_params(self):
        return {"identity": 0, "linear": 2, "free": 1 + self.basis.dimension if self.basis else 0,
                "standardized": self.basis.dimension if self.basis else 0}[self.family]

    def params(self):
        """Unconstrained parameter vector used by the optimizer.

        ``linear`` is parameterized as ``(alpha, log beta)``, which is the free
        family with a constant exponent.
        """
        if self.family == "identity":
            return np.zeros(0)
        if self.family == "linear":
            return np.array([self.alpha, np.log(self.beta)])
        if self.family == "free":
            return np.concatenate([[self.gamma0], self.gamma])
        return self.gamma.copy()

    def with_params(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "identity":
            return self
        if self.family == "linear":
            if x[1] > OVERFLOW_LIMIT:
                raise WarpOverflowError("log slope exceeds the overflow limit (coefficient 1)")
            return replace(self, alpha=float(x[0]), beta=float(np.exp(x[1])))
        if self.family == "free":
            return replace(self, gamma0=float(x[0]), gamma=x[1:].copy())
        return replace(self, gamma=x.copy())


def identity_warp(family, domain, basis=None):
    """The member of ``family`` equal to ``W(t) = t``."""
    return WarpModel(family, (float(domain[0]), float(domain[1])), basis=basis)


CELL_STRIDE = 10


@lru_cache(maxsize=16)
def _node_layout(basis, domain, n_grid):
    grid = np.linspace(domain[0], domain[1], n_grid)
    cells = np.linspace(domain[0], domain[1], max(20, (n_grid - 1) // CELL_STRIDE) + 1)
    left = cells[:-1]
    h = np.diff(cells)
    nodes = (left[:, None] + h[:, None] * (_GL_NODES + 1) / 2).ravel()
    weights = (h[:, None] * _GL_WEIGHTS / 2).ravel()
    B_nodes = basis_matrix(basis, nodes)
    B_grid = basis_matrix(basis, grid)
    return cells, weights, B_nodes, B_grid


@dataclass
class WarpState:
    """Warp values at query times plus the penalty, with parameter gradients."""

    W: np.ndarray
    dW: np.ndarray
    slope: np.ndarray
    penalty: float
    dpenalty: np.ndarray
    integral: float


class WarpPlan:
    """Precomputed quadrature for repeated warp evaluation at fixed query times."""

    def __init__(self, family, domain, basis, times, n_grid=None):
        self.family = family
        self.domain = (float(domain[0]), float(domain[1]))
        self.basis = basis
        self.times = np.clip(np.asarray(times, dtype=float), *self.domain)
        if family not in ("free", "standardized"):
            return
        n_grid = quad_points() if n_grid is None else n_grid
        self.cells, self.w_nodes, self.B_nodes, self.B_grid = _node_layout(
            basis, self.domain, n_grid)
        M = len(self.cells) - 1
        q = basis.dimension
        cell = np.clip(np.searchsorted(self.cells, self.times, side="right") - 1, 0, M - 1)
        self.cell = cell
        start = self.cells[cell]
        span = self.times - start
        part_nodes = (start[:, None] + span[:, None] * (_GL_NODES + 1) / 2).ravel()
        self.w_part = (span[:, None] * _GL_WEIGHTS / 2)
        self.B_part = basis_matrix(basis, part_nodes).reshape(len(self.times), 3, q)
        self.B_times = basis_matrix(basis, self.times)
        self.M = M

    def evaluate(self, model, with_grad=True):
        T = model.T
        t = self.times
        if model.family == "identity":
            return WarpState(t.copy(), np.zeros((len(t), 0)), np.ones_like(t), 0.0,
                             np.zeros(0), 0.0)
        if model.family == "linear":
            beta = model.beta
            if beta <= DEGENERATE_SLOPE:
                raise DegenerateWarpError(f"warp slope {beta:.3g} is numerically zero")
            J = T * (1.0 / beta - 1.0)
            dW = np.column_stack([np.ones_like(t), beta * t])
            dJ = np.array([0.0, -T / beta])
            return WarpState(model.alpha + beta * t, dW, np.full_like(t, beta), J * J,
                             2 * J * dJ, J)
        return self._evaluate_spline(model, with_grad)

    def _evaluate_spline(self, model, with_grad):
        gamma = model.gamma
        T = model.T
        f_nodes = self.B_nodes @ gamma
        f_grid = self.B_grid @ gamma
        f_part = self.B_part @ gamma
        f_times = self.B_times @ gamma
        fmax = max(f_nodes.max(), f_grid.max(), f_part.max() if f_part.size else -np.inf)
        if fmax > OVERFLOW_LIMIT:
            idx = int(np.argmax(np.abs(gamma)))
            raise WarpOverflowError(
                f"exp(f) overflows (max f = {fmax:.3g}); offending coefficient gamma[{idx}]"
                f" = {gamma[idx]:.3g}")
        if min(f_nodes.min(), f_grid.min()) < -OVERFLOW_LIMIT:
            raise DegenerateWarpError("exp(f) underflows: warp slope is numerically zero")
        e_nodes = np.exp(f_nodes)
        we = self.w_nodes * e_nodes
        cell_sum = we.reshape(self.M, 3).sum(axis=1)
        cum = np.concatenate([[0.0], np.cumsum(cell_sum)])
        e_part = np.exp(f_part)
        E = cum[self.cell] + np.sum(self.w_part * e_part, axis=1)
        S = cum[-1]
        e_times = np.exp(f_times)

        # 1/W' integral
        einv = self.w_nodes / e_nodes
        K = einv.sum()
        if model.family == "free":
            min_slope = np.exp(f_grid.min())
            W = model.gamma0 + E
            slope = e_times
            J = K - T
            overflow = False
        else:
            min_slope = T * np.exp(f_grid.min()) / S
            W = T * E / S
            slope = T * e_times / S
            with np.errstate(over="ignore"):
                J = S * K / T - T
                overflow = not np.isfinite(J * J)
        if overflow:
            raise DegenerateWarpError("warp penalty overflows: slope range is too wide")
        if min_slope <= DEGENERATE_SLOPE:
            raise DegenerateWarpError(f"warp slope {min_slope:.3g} is numerically zero")
        if not with_grad:
            return WarpState(W, None, slope, J * J, None, J)

        q = len(gamma)
        cell_grad = (we[:, None] * self.B_nodes).reshape(self.M, 3, q).sum(axis=1)
        cum_grad = np.vstack([np.zeros(q), np.cumsum(cell_grad, axis=0)])
        dE = cum_grad[self.cell] + np.einsum("nk,nkq->nq", self.w_part * e_part, self.B_part)
        dS = cum_grad[-1]
        dK = -(einv @ self.B_nodes)
        if model.family == "free":
            dW = np.column_stack([np.ones(len(W)), dE])
            dJ = np.concatenate([[0.0], dK])
        else:
            dW = T * (dE * S - E[:, None] * dS[None, :]) / (S * S)
            dJ = (dS * K + S * dK) / T
        return WarpState(W, dW, slope, J * J, 2 * J * dJ, J)


def _plan(model, t):
    return WarpPlan(model.family, model.domain, model.basis, t)


def warp_eval(model, t):
    """Warped time ``W(t)`` (vectorized over ``t``)."""
    scalar = np.ndim(t) == 0
    W = _plan(model, np.atleast_1d(t)).evaluate(model, with_grad=False).W
    return float(W[0]) if scalar else W


def warp_derivative(model, t):
    """Pointwise slope ``W'(t)``."""
    scalar = np.ndim(t) == 0
    s = _plan(model, np.atleast_1d(t)).evaluate(model, with_grad=False).slope
    return float(s[0]) if scalar else s


def warp_penalty(model):
    """``(int_0^T (1/W'(t) - 1) dt)^2``; zero for the identity and any unit-slope line."""
    return float(_plan(model, [model.domain[0]]).evaluate(model, with_grad=False).penalty)
