"""Dense BFGS with a backtracking Armijo line search.

Trial points at which the objective raises one of ``reject`` (a degenerate or
overflowing warp, say) are treated as infinitely bad, so the line search
simply shrinks the step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWarpError, WarpOverflowError

ARMIJO = 1e-4
MIN_STEP = 1e-14


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    n_eval: int
    converged: bool
    message: str


def bfgs(fun_grad, x0, max_iter=200, gtol=1e-8, ftol=1e-12,
         reject=(DegenerateWarpError, WarpOverflowError)):
    """Minimize ``fun_grad(x) -> (f, g)`` starting from ``x0``.

    The returned value never exceeds ``f(x0)``.
    """
    x = np.array(x0, dtype=float)
    f, g = fun_grad(x)
    n_eval = 1
    H = None
    n = len(x)
    if n == 0:
        return OptimizeResult(x, f, g, 0, n_eval, True, "no parameters")
    for it in range(max_iter):
        if np.max(np.abs(g)) <= gtol:
            return OptimizeResult(x, f, g, it, n_eval, True, "gradient below tolerance")
        if H is None:
            d = -g / max(1.0, np.max(np.abs(g)))
        else:
            d = -(H @ g)
        slope = g @ d
        if slope >= 0:
            H = None
            d = -g / max(1.0, np.max(np.abs(g)))
            slope = g @ d

        step = 1.0
        while True:
            x_new = x + step * d
            try:
                f_new, g_new = fun_grad(x_new)
            except reject:
                f_new, g_new = np.inf, None
            n_eval += 1
            if f_new <= f + ARMIJO * step * slope:
                break
            if np.isfinite(f_new):
                # minimizer of the quadratic through f, slope and f_new
                trial = -slope * step * step / (2.0 * (f_new - f - slope * step))
                step = min(max(trial, 0.1 * step), 0.5 * step)
            else:
                step *= 0.25
            if step < MIN_STEP:
                break
        if step < MIN_STEP:
            if H is not None:
                H = None
                continue
            return OptimizeResult(x, f, g, it, n_eval, False, "line search failed")

        s = x_new - x
        y = g_new - g
        ys = y @ s
        if ys > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if H is None:
                H = np.eye(n) * (ys / (y @ y))
            rho = 1.0 / ys
            Hy = H @ y
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * (y @ Hy) + rho) * np.outer(s, s)
        decrease = f - f_new
        x, f, g = x_new, f_new, g_new
        if decrease <= ftol * max(abs(f), 1e-300):
            return OptimizeResult(x, f, g, it + 1, n_eval, True, "relative decrease below tolerance")
    return OptimizeResult(x, f, g, max_iter, n_eval, False, "iteration cap reached")
