import json
import math

import numpy as np
import pytest

from models.errors import SolverFailed, WrongFamily
from models.problem import LassoSpec, LogisticL1Spec
from models.solve import ScreeningConfig, SolveOptions
from problems.builders import make_lasso, make_logistic, problem_at_fraction
from solvers.prox import block_soft_threshold, soft_threshold
from solvers.prox_grad import estimate_step, polish_support, prox_grad_solve
from tests.conftest import random_lasso, random_logistic


def test_soft_threshold():
    np.testing.assert_allclose(soft_threshold(np.array([2.0, -0.5]), 1.0), [1.0, 0.0])
    v = np.array([0.3, -4.0])
    np.testing.assert_allclose(soft_threshold(v, 0.0), v)
    with pytest.raises(ValueError):
        soft_threshold(v, -1.0)


def test_soft_threshold_matches_grid():
    grid = np.linspace(-5.0, 5.0, 100001)
    best = grid[np.argmin(0.5 * (grid - 3.0) ** 2 + np.abs(grid))]
    assert soft_threshold(np.array([3.0]), 1.0)[0] == pytest.approx(best, abs=1e-4)
    assert soft_threshold(np.array([3.0]), 1.0)[0] == pytest.approx(2.0)


def test_block_soft_threshold():
    np.testing.assert_allclose(block_soft_threshold(np.array([3.0, 4.0]), 10.0), [0.0, 0.0])
    np.testing.assert_allclose(block_soft_threshold(np.array([3.0, 4.0]), 2.5), [1.5, 2.0])


def test_estimate_step():
    y = np.array([1.0, 1.0])
    assert estimate_step(make_lasso(LassoSpec(np.eye(2), y, 1.0))) == pytest.approx(1.0)
    assert estimate_step(make_lasso(LassoSpec(2.0 * np.eye(2), y, 1.0))) == pytest.approx(0.25)
    assert estimate_step(make_logistic(LogisticL1Spec(np.eye(2), 1.0))) == pytest.approx(4.0)


def test_orthonormal_lasso_matches_closed_form(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    y = rng.standard_normal(8)
    lam = 0.5 * np.max(np.abs(Q.T @ y))
    p = make_lasso(LassoSpec(Q, y, lam))
    result = prox_grad_solve(p, SolveOptions(gap_tolerance=1e-12))
    assert result.converged
    np.testing.assert_allclose(result.x, soft_threshold(Q.T @ y, lam), atol=1e-8)


def test_lambda_max_gives_zero_solution():
    p = random_lasso(seed=0, fraction=1.0)
    result = prox_grad_solve(p)
    assert result.converged
    np.testing.assert_array_equal(result.x, np.zeros(p.n))


def test_logistic_with_zero_design():
    p = make_logistic(LogisticL1Spec(np.zeros((3, 2)), 1.0))
    result = prox_grad_solve(p)
    np.testing.assert_array_equal(result.x, np.zeros(2))
    assert result.primal == pytest.approx(3 * math.log(2))
    assert result.step == 1.0


@pytest.mark.parametrize("family", ['lasso', 'l2_lasso', 'elastic_net', 'nonneg_lasso'])
def test_converges_for_least_squares_families(family):
    p = random_lasso(seed=3, family=family)
    result = prox_grad_solve(p, SolveOptions(gap_tolerance=1e-10))
    assert result.converged
    assert result.gap <= 1e-10
    if family == 'nonneg_lasso':
        assert np.all(result.x >= 0)


def test_converges_for_logistic():
    p = random_logistic(seed=4)
    result = prox_grad_solve(p, SolveOptions(gap_tolerance=1e-10))
    assert result.converged
    assert np.count_nonzero(result.x) < p.n


def test_gap_trace_is_monotone():
    p = random_lasso(seed=5)
    result = prox_grad_solve(p, SolveOptions(gap_tolerance=1e-10))
    assert len(result.gap_trace) == result.iterations + 1
    assert all(b <= a for a, b in zip(result.gap_trace, result.gap_trace[1:]))
    assert result.gap_trace[-1] == pytest.approx(result.gap)


def test_failure_raises_with_partial_result():
    p = random_lasso(seed=6)
    opts = SolveOptions(max_iters=1, gap_tolerance=1e-14, polish=False)
    with pytest.raises(SolverFailed) as info:
        prox_grad_solve(p, opts)
    assert info.value.result is not None
    assert info.value.result.iterations == 1

    opts = SolveOptions(max_iters=1, gap_tolerance=1e-14, polish=False, raise_on_failure=False)
    assert not prox_grad_solve(p, opts).converged


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(gap_tolerance=0.0)
    with pytest.raises(ValueError):
        SolveOptions(step=-1.0)
    with pytest.raises(ValueError):
        ScreeningConfig(period=0)


def test_polish_support_keeps_zero(lasso_21):
    np.testing.assert_array_equal(polish_support(lasso_21, np.zeros(2)), [0.0, 0.0])
    np.testing.assert_allclose(polish_support(lasso_21, np.array([0.9, 0.0])), [1.0, 0.0])


@pytest.mark.parametrize("tag", ['gap', 'ryu', 'dynamic_edpp'])
def test_dynamic_screening_matches_plain_solve(tag):
    p = random_lasso(seed=7, m=30, n=60)
    tol = 1e-9
    off = prox_grad_solve(p, SolveOptions(gap_tolerance=tol))
    on = prox_grad_solve(p, SolveOptions(gap_tolerance=tol, screening=ScreeningConfig(tag, 5)))
    assert on.converged
    assert abs(on.primal - off.primal) <= 2 * tol
    assert on.kept is not None
    assert all(a <= b for a, b in zip(on.screened_counts, on.screened_counts[1:]))

    reference = prox_grad_solve(p, SolveOptions(gap_tolerance=1e-12))
    screened = np.setdiff1d(np.arange(p.n), on.kept)
    assert np.all(np.abs(reference.x[screened]) <= 1e-9)
    assert np.all(on.x[screened] == 0.0)


def test_screening_events_rebuild_on_kept_columns():
    p = random_lasso(seed=8, m=30, n=60)
    result = prox_grad_solve(p, SolveOptions(screening=ScreeningConfig('ryu', 3)))
    assert result.events
    for event in result.events:
        assert event.x.size == event.kept.size
        assert event.u.size == p.m
        assert event.screened_count == p.n - event.kept.size + event.newly_screened


def test_screening_needs_l1_threshold():
    p = random_lasso(seed=0, family='l2_lasso')
    with pytest.raises(WrongFamily):
        prox_grad_solve(p, SolveOptions(screening=ScreeningConfig('gap')))


def test_screening_unknown_ball():
    p = random_lasso(seed=0)
    with pytest.raises(ValueError, match="unknown ball"):
        prox_grad_solve(p, SolveOptions(screening=ScreeningConfig('dpp')))


@pytest.mark.parametrize("tag", ['edpp', 'slores', 'sfer'])
def test_screening_rejects_balls_that_never_fire(tag):
    p = random_lasso(seed=7, m=30, n=60)
    with pytest.raises((ValueError, WrongFamily)):
        prox_grad_solve(p, SolveOptions(screening=ScreeningConfig(tag, 5)))


def test_screening_rejects_wrong_family_ball():
    # dynamic_edpp needs a least-squares f
    p = random_logistic(seed=2)
    with pytest.raises(WrongFamily, match="dynamic_edpp"):
        prox_grad_solve(p, SolveOptions(screening=ScreeningConfig('dynamic_edpp', 5)))


def test_result_serializes():
    p = random_lasso(seed=9)
    result = prox_grad_solve(p, SolveOptions(screening=ScreeningConfig('ryu', 5)))
    payload = json.loads(json.dumps(result.to_dict()))
    assert payload['converged'] is True
    assert len(payload['x']) == p.n
    assert payload['screened_counts'] == result.screened_counts


def test_warm_start():
    p = problem_at_fraction('lasso', np.eye(2), np.array([2.0, 1.0]), 0.5)
    result = prox_grad_solve(p, SolveOptions(x0=np.array([1.0, 0.0])))
    assert result.iterations == 0
    assert result.converged
