import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momalign.errors import DegenerateWarpError
from momalign.optim import bfgs


def rosenbrock(x):
    f = 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2
    g = np.array([-400 * x[0] * (x[1] - x[0] ** 2) - 2 * (1 - x[0]), 200 * (x[1] - x[0] ** 2)])
    return f, g


def test_rosenbrock():
    res = bfgs(rosenbrock, [-1.2, 1.0], max_iter=500, gtol=1e-10, ftol=0)
    assert res.converged
    assert np.allclose(res.x, [1, 1], atol=1e-6)


@given(st.integers(1, 8), st.integers(0, 10_000))
def test_convex_quadratic_and_descent(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    H = A @ A.T + np.eye(n)
    b = rng.normal(size=n)
    fg = lambda x: (0.5 * x @ H @ x - b @ x, H @ x - b)  # noqa: E731
    x0 = rng.normal(size=n)
    res = bfgs(fg, x0, max_iter=200, gtol=1e-9, ftol=0)
    assert res.fun <= fg(x0)[0]
    assert np.allclose(res.x, np.linalg.solve(H, b), atol=1e-6)


def test_stationary_start_is_returned_unchanged():
    fg = lambda x: (float(x @ x), 2 * x)  # noqa: E731
    res = bfgs(fg, np.zeros(3))
    assert res.n_iter == 0 and res.converged and np.all(res.x == 0)


def test_rejected_points_shrink_the_step():
    # objective undefined beyond x > 0.5; minimum of the smooth part at 2
    def fg(x):
        if x[0] > 0.5:
            raise DegenerateWarpError("out of range")
        return (x[0] - 2) ** 2, np.array([2 * (x[0] - 2)])

    res = bfgs(fg, [0.0], max_iter=50)
    assert 0.0 < res.x[0] <= 0.5
    assert res.fun < 4.0


def test_other_errors_propagate():
    def fg(x):
        raise ZeroDivisionError

    with pytest.raises(ZeroDivisionError):
        bfgs(fg, [0.0])


def test_empty_problem():
    res = bfgs(lambda x: (1.0, np.zeros(0)), np.zeros(0))
    assert res.converged and res.fun == 1.0
