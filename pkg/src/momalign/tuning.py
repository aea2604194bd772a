"""Constrained grid search over the penalty weights.

The search minimizes Sync subject to upper bounds on sigma and on the mean
warp penalty. The ``lambda_w`` and ``lambda_mom`` grids are coarse; the
``lambda_sync`` grid is finer and is swept in increasing order so that each
fit can warm-start from its neighbour.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .metrics import sigma_metric, sync_metric
from .registration import register, with_lambdas

__all__ = ["TuningGrid", "TuningPoint", "TuningReport", "grid_search", "is_feasible",
           "pareto_front", "sync_metric", "sigma_metric"]

log = logging.getLogger(__name__)

METHODS = ("moments", "cmr")


def _positive_tuple(values, name):
    values = tuple(float(v) for v in values)
    if not values:
        raise ConfigError(f"{name} must not be empty")
    if not all(v > 0 and math.isfinite(v) for v in values):
        raise ConfigError(f"{name} must be positive and finite")
    return values


@dataclass(frozen=True)
class TuningGrid:
    sync_values: tuple = tuple(np.logspace(-3, 2, 11))
    mom_values: tuple = (1e3, 1e4, 1e5, 1e6)
    w_values: tuple = (1e-1, 1e0, 1e1)
    sigma_max: float = 0.1
    pw_max: float = 0.5

    def __post_init__(self):
        for name in ("sync_values", "mom_values", "w_values"):
            object.__setattr__(self, name, _positive_tuple(getattr(self, name), name))
        if not (self.sigma_max >= 0 and self.pw_max >= 0):
            raise ConfigError("bounds must be non-negative")

    def points(self, method="moments"):
        """Grid triples in sweep order: outer (mom, w), inner increasing sync."""
        moms = (0.0,) if method == "cmr" else self.mom_values
        syncs = sorted(self.sync_values)
        return [(s, m, w) for m in moms for w in self.w_values for s in syncs]


@dataclass(frozen=True)
class TuningPoint:
    lambda_sync: float
    lambda_mom: float
    lambda_w: float
    sync: float
    sigma: float
    mean_pw: float
    feasible: bool
    converged: bool = True

    @property
    def lambdas(self):
        return (self.lambda_sync, self.lambda_mom, self.lambda_w)


def is_feasible(sigma, mean_pw, sigma_max, pw_max):
    return bool(np.isfinite(sigma) and np.isfinite(mean_pw)
                and sigma <= sigma_max and mean_pw <= pw_max)


def _choose(points):
    feasible = [p for p in points if p.feasible and np.isfinite(p.sync)]
    if not feasible:
        return None
    return min(feasible, key=lambda p: (p.sync, p.sigma, p.lambda_sync))


def pareto_front(points):
    """Points not dominated in (sigma, Sync), sorted by increasing sigma.

    Along the returned list Sync is strictly decreasing.
    """
    ordered = sorted((p for p in points if np.isfinite(p.sigma) and np.isfinite(p.sync)),
                     key=lambda p: (p.sigma, p.sync))
    front, best = [], math.inf
    for p in ordered:
        if p.sync < best:
            front.append(p)
            best = p.sync
    return front


@dataclass(eq=False)
class TuningReport:
    method: str
    grid: TuningGrid
    points: list
    chosen: TuningPoint | None
    results: dict = field(default_factory=dict, repr=False)

    @property
    def no_feasible(self):
        return self.chosen is None

    @property
    def frontier(self):
        return [(p.sigma, p.sync) for p in pareto_front(self.points)]

    def rescored(self, sigma_max=None, pw_max=None):
        """The same fits judged against different bounds."""
        grid = replace(self.grid,
                       sigma_max=self.grid.sigma_max if sigma_max is None else sigma_max,
                       pw_max=self.grid.pw_max if pw_max is None else pw_max)
        points = [replace(p, feasible=is_feasible(p.sigma, p.mean_pw, grid.sigma_max, grid.pw_max))
                  for p in self.points]
        return TuningReport(self.method, grid, points, _choose(points), self.results)

    def write_csv(self, path):
        front = {id(p) for p in pareto_front(self.points)}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda_sync", "lambda_mom", "lambda_w", "sync", "sigma", "mean_pw",
                        "feasible", "converged", "pareto", "chosen"])
            for p in self.points:
                w.writerow([repr(p.lambda_sync), repr(p.lambda_mom), repr(p.lambda_w),
                            repr(p.sync), repr(p.sigma), repr(p.mean_pw), int(p.feasible),
                            int(p.converged), int(id(p) in front), int(p is self.chosen)])


def read_tuning_csv(path):
    """Rows of a tuning CSV as dictionaries of floats."""
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def grid_search(data, grid, config, method="moments", keep_results=False):
    """Fit every grid point and pick the Sync-minimal feasible one.

    ``method="cmr"`` fixes ``lambda_mom = 0`` and freezes ``mu_theta`` at the
    smoothed cross-sectional mean, so only the ``(sync, w)`` plane is searched.
    Ties on Sync go to the smaller sigma and then to the smaller
    ``lambda_sync``.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown tuning method {method!r}")
    if method == "cmr":
        config = replace(config, specs=())
    points, results = [], {}
    warm, last_key = None, None
    for s, m, w in grid.points(method):
        key = (m, w)
        if key != last_key:
            warm, last_key = None, key
        cfg = with_lambdas(config, s, m, w)
        res = register(data, cfg, init=warm, freeze_mu=(method == "cmr"), method=method)
        # CMR keeps its frozen target; the moments fit carries mu forward
        warm = (res.params, res.mu_theta)
        met = res.metrics
        points.append(TuningPoint(s, m, w, met["sync"], met["sigma"], met["mean_pw"],
                                  is_feasible(met["sigma"], met["mean_pw"], grid.sigma_max,
                                              grid.pw_max), res.converged))
        log.info("lambda=(%g, %g, %g): Sync=%.4g sigma=%.4g P(W)=%.4g", s, m, w,
                 met["sync"], met["sigma"], met["mean_pw"])
        if keep_results:
            results[(s, m, w)] = res
    return TuningReport(method, grid, points, _choose(points), results)
