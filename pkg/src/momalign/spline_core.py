"""Clamped B-spline bases on an interval, penalized least-squares smoothing and
the shared trapezoid quadrature grid."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import BSpline

from .errors import (
    DimensionMismatchError,
    InvalidBasisError,
    InvalidDomainError,
    RankDeficiencyError,
)

DEFAULT_QUAD_POINTS = 2001


def quad_points():
    """Number of points of the shared quadrature grid (``ALIGN_QUAD_POINTS`` overrides)."""
    value = os.environ.get("ALIGN_QUAD_POINTS")
    if value is None:
        return DEFAULT_QUAD_POINTS
    n = int(value)
    if n < 3:
        raise ValueError("ALIGN_QUAD_POINTS must be at least 3")
    return n


def quad_grid(domain, n=None):
    lo, hi = domain
    return np.linspace(lo, hi, quad_points() if n is None else n)


def trapezoid_weights(grid):
    """Weights w such that ``w @ f(grid)`` is the composite trapezoid rule."""
    grid = np.asarray(grid, dtype=float)
    dt = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


@dataclass(frozen=True)
class BasisSpec:
    domain: tuple
    dimension: int
    degree: int
    knots: tuple

    def __post_init__(self):
        lo, hi = self.domain
        k = self.degree
        if len(self.knots) != self.dimension + k + 1:
            raise InvalidBasisError("knot count must equal dimension + degree + 1")
        t = np.asarray(self.knots)
        if np.any(np.diff(t) < 0):
            raise InvalidBasisError("knots must be non-decreasing")
        if np.any(t[: k + 1] != lo) or np.any(t[-k - 1:] != hi):
            raise InvalidBasisError("endpoint knots must be clamped at the domain")

    @property
    def T(self):
        return self.domain[1]

    @property
    def knot_array(self):
        return np.asarray(self.knots, dtype=float)


def make_basis(domain, dimension, degree=3):
    """Clamped B-spline basis with uniformly spaced interior knots."""
    lo, hi = float(domain[0]), float(domain[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        raise InvalidDomainError(f"domain [{lo}, {hi}] is empty, reversed or unbounded")
    if degree < 0:
        raise InvalidBasisError("degree must be non-negative")
    if dimension <= degree:
        raise InvalidBasisError(f"dimension {dimension} must exceed degree {degree}")
    n_interior = dimension - degree - 1
    interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
    knots = np.concatenate([np.full(degree + 1, lo), interior, np.full(degree + 1, hi)])
    return BasisSpec((lo, hi), int(dimension), int(degree), tuple(float(k) for k in knots))


@lru_cache(maxsize=64)
def _eye_spline(basis):
    return BSpline(basis.knot_array, np.eye(basis.dimension), basis.degree, extrapolate=False)


def basis_matrix(basis, t, deriv=0, return_clamped=False):
    """Evaluate all basis functions (or a derivative) at the times ``t``.

    Times outside the domain are clamped to the nearest endpoint; with
    ``return_clamped`` a boolean mask of the clamped entries is also returned.
    """
    if deriv < 0 or deriv > basis.degree:
        raise InvalidBasisError(f"derivative order {deriv} outside 0..{basis.degree}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = basis.domain
    tc = np.clip(t, lo, hi)
    B = _eye_spline(basis)(tc, nu=deriv)
    if return_clamped:
        return B, tc != t
    return B


def basis_eval(basis, t, deriv=0):
    """All basis functions (or their ``deriv``-th derivatives) at a single time."""
    return basis_matrix(basis, [t], deriv)[0]


@dataclass(frozen=True)
class Curve:
    id: str
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape:
            raise DimensionMismatchError("times and values must be equal-length vectors", self.id)
        if np.any(np.diff(times) <= 0):
            raise DimensionMismatchError("times must be strictly increasing", self.id)
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DimensionMismatchError("times and values must be finite", self.id)

    @property
    def n(self):
        return len(self.times)


@lru_cache(maxsize=32)
def roughness_matrix(basis, n_grid=None):
    """Gram matrix of second derivatives, ``R[a, b] = int z_a'' z_b'' dt`` (trapezoid)."""
    grid = quad_grid(basis.domain, n_grid)
    if basis.degree < 2:
        return np.zeros((basis.dimension, basis.dimension))
    B2 = basis_matrix(basis, grid, 2)
    w = trapezoid_weights(grid)
    return B2.T @ (w[:, None] * B2)


def fit_coefficients(times, values, basis, roughness=0.0, curve_id=None):
    """Penalized least squares for arbitrary (possibly repeated) abscissae."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if roughness < 0:
        raise ValueError("roughness must be non-negative")
    if roughness == 0 and len(np.unique(times)) < basis.dimension:
        raise RankDeficiencyError(
            f"{len(times)} observations cannot determine {basis.dimension} coefficients"
            " without a roughness penalty", curve_id)
    B = basis_matrix(basis, times)
    A = B.T @ B
    if roughness > 0:
        A = A + roughness * roughness_matrix(basis)
    if np.linalg.cond(A) > 1e14:
        raise RankDeficiencyError("normal equations are numerically singular", curve_id)
    return np.linalg.solve(A, B.T @ values)


def smooth_fit(curve, basis, roughness=0.0):
    """Coefficients minimising ``sum (y - z'theta)^2 + roughness * int (z''theta)^2``."""
    return fit_coefficients(curve.times, curve.values, basis, roughness, curve.id)
