"""Registration diagnostics shared by the fitting, baseline and tuning code."""

import numpy as np

from .errors import DimensionMismatchError, UndefinedSyncError


def _spread(curves):
    # offsets from the first curve are exactly zero for identical curves
    d = np.asarray(curves, dtype=float)
    d = d - d[0]
    return float(np.mean((d - d.mean(axis=0)) ** 2))


def sync_metric(originals, synchronized):
    """Cross-curve spread of the synchronized curves as a percentage of the
    spread of the (smoothed) originals.

    Both arguments are ``(N, G)`` arrays sampled on a common grid.
    """
    originals = np.asarray(originals, dtype=float)
    synchronized = np.asarray(synchronized, dtype=float)
    if originals.shape != synchronized.shape:
        raise DimensionMismatchError("original and synchronized curves must share a grid")
    if originals.shape[0] < 2:
        raise UndefinedSyncError("Sync needs at least two curves")
    denom = _spread(originals)
    if denom < 1e-15:
        raise UndefinedSyncError("original curves are already identical")
    return 100.0 * (_spread(synchronized) / denom)


def sigma_metric(observed, fitted):
    """Root mean squared difference between observed values and fitted values.

    Each argument is a list of per-curve arrays (curves may differ in length).
    """
    if len(observed) != len(fitted):
        raise DimensionMismatchError("observed and fitted must hold the same curves")
    sse = 0.0
    count = 0
    for y, yhat in zip(observed, fitted):
        y = np.asarray(y, dtype=float)
        yhat = np.asarray(yhat, dtype=float)
        if y.shape != yhat.shape:
            raise DimensionMismatchError("observed and fitted lengths differ")
        sse += float(np.sum((y - yhat) ** 2))
        count += y.size
    return float(np.sqrt(sse / count))
