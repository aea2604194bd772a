import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momalign.errors import ConfigError
from momalign.feature_moments import parse_features
from momalign.registration import FitConfig
from momalign.simgen import Scenario, simulate
from momalign.tuning import (TuningGrid, TuningPoint, TuningReport, _choose, grid_search,
                             is_feasible, pareto_front, read_tuning_csv)

CFG = FitConfig(specs=tuple(parse_features("max:r=100,min:r=100")), warp_family="standardized",
                amp_dim=12, warp_dim=4, max_outer_iters=3, inner_max_iters=40)
GRID = TuningGrid(sync_values=(0.1, 1.0), mom_values=(1e3,), w_values=(0.1,), sigma_max=0.1)


@pytest.fixture(scope="module")
def data():
    return simulate(Scenario("three", n_curves=4, n_points=40, seed=5)).curves


@pytest.fixture(scope="module")
def report(data):
    return grid_search(data, GRID, CFG)


def point(sync, sigma, lam=1.0, pw=0.0, feasible=True):
    return TuningPoint(lam, 1e3, 0.1, sync, sigma, pw, feasible)


def test_sweep_order_and_cmr_plane():
    g = TuningGrid(sync_values=(1.0, 0.1), mom_values=(1e3, 1e4), w_values=(0.1,))
    assert g.points() == [(0.1, 1e3, 0.1), (1.0, 1e3, 0.1), (0.1, 1e4, 0.1), (1.0, 1e4, 0.1)]
    assert g.points("cmr") == [(0.1, 0.0, 0.1), (1.0, 0.0, 0.1)]


def test_grid_validation():
    with pytest.raises(ConfigError):
        TuningGrid(sync_values=())
    with pytest.raises(ConfigError):
        TuningGrid(mom_values=(-1.0,))
    with pytest.raises(ConfigError):
        TuningGrid(sigma_max=-0.1)


def test_single_point_grid_returns_that_point(data):
    grid = TuningGrid(sync_values=(1.0,), mom_values=(1e3,), w_values=(0.1,), sigma_max=1.0,
                      pw_max=10.0)
    rep = grid_search(data, grid, CFG)
    assert len(rep.points) == 1 and rep.chosen is rep.points[0]


def test_chosen_is_feasible_and_sync_minimal(report):
    assert report.chosen is not None and report.chosen.feasible
    feasible = [p for p in report.points if p.feasible]
    assert report.chosen.sync == min(p.sync for p in feasible)


def test_zero_bounds_leave_nothing_feasible(report):
    rep = report.rescored(sigma_max=0.0, pw_max=0.0)
    assert rep.no_feasible and rep.chosen is None
    assert not any(p.feasible for p in rep.points)


def test_rescoring_with_the_same_bounds_is_idempotent(report):
    again = report.rescored()
    assert again.points == report.points and again.chosen == report.chosen


def test_ties_prefer_smaller_sigma_then_smaller_lambda():
    pts = [point(1.0, 0.2, 3.0), point(1.0, 0.1, 2.0), point(1.0, 0.1, 1.0), point(0.5, 0.3,
                                                                                  feasible=False)]
    assert _choose(pts) is pts[2]


def test_feasibility_rejects_non_finite():
    assert not is_feasible(np.nan, 0.0, 1.0, 1.0)
    assert is_feasible(0.1, 0.5, 0.1, 0.5)


@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 1)), min_size=1, max_size=30))
def test_pareto_front_is_monotone_and_undominated(pairs):
    pts = [point(s, g) for s, g in pairs]
    front = pareto_front(pts)
    sig = [p.sigma for p in front]
    syn = [p.sync for p in front]
    assert sig == sorted(sig)
    assert all(a > b for a, b in zip(syn, syn[1:]))
    for f in front:
        assert not any((p.sigma <= f.sigma and p.sync < f.sync)
                       or (p.sigma < f.sigma and p.sync <= f.sync) for p in pts)


def test_csv_round_trip(report, tmp_path):
    path = tmp_path / "tuning.csv"
    report.write_csv(path)
    rows = read_tuning_csv(path)
    assert len(rows) == len(report.points)
    for row, p in zip(rows, report.points):
        assert (row["lambda_sync"], row["sync"], row["sigma"]) == (p.lambda_sync, p.sync, p.sigma)
    assert sum(r["chosen"] for r in rows) == 1
    first = path.read_bytes()
    report.write_csv(path)
    assert path.read_bytes() == first


def test_cmr_search_has_no_moment_weight(data):
    grid = TuningGrid(sync_values=(0.1,), mom_values=(1e3,), w_values=(0.1,))
    rep = grid_search(data, grid, CFG, method="cmr")
    assert [p.lambda_mom for p in rep.points] == [0.0]


def test_unknown_method(data):
    with pytest.raises(ConfigError):
        grid_search(data, GRID, CFG, method="landmark")


def test_empty_report_frontier():
    rep = TuningReport("moments", GRID, [], None)
    assert rep.frontier == [] and rep.no_feasible
