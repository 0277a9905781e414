import math

import numpy as np
import pytest

from duality.objectives import (
    bregman_divergence,
    dual_feasible,
    dual_objective,
    duality_gap,
    fenchel_divergence,
    primal_dual_report,
    primal_objective,
    refined_fenchel_young_residual,
)
from models.errors import DimensionMismatch
from models.problem import Problem
from models.solve import SolveOptions
from problems.regularizers import NonNegativeL1
from problems.smooth import LeastSquares, Logistic
from screening.pairs import dual_scaling, sequential_pair
from solvers.prox_grad import prox_grad_solve
from tests.conftest import random_lasso, random_logistic
from utils.ext_real import INF


def test_primal_objective(lasso_21):
    assert primal_objective(lasso_21, np.zeros(2)) == pytest.approx(2.5)
    assert primal_objective(lasso_21, np.array([1.0, 0.0])) == pytest.approx(2.0)


def test_primal_objective_outside_domain():
    p = Problem(np.eye(2), LeastSquares([1.0, 1.0]), NonNegativeL1(1.0))
    assert primal_objective(p, np.array([-1.0, 0.0])) == INF


def test_dual_objective(lasso_21):
    assert dual_objective(lasso_21, np.zeros(2)) == pytest.approx(0.0)
    assert dual_objective(lasso_21, np.array([2.0, 0.0])) == -INF
    assert dual_objective(lasso_21, np.array([1.0, 1.0])) == pytest.approx(2.0)


def test_dimension_mismatch(lasso_21):
    with pytest.raises(DimensionMismatch):
        dual_objective(lasso_21, np.zeros(3))


def test_duality_gap(lasso_21):
    assert duality_gap(lasso_21, np.zeros(2), np.zeros(2)) == pytest.approx(2.5)
    assert duality_gap(lasso_21, np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-14)
    assert duality_gap(lasso_21, np.zeros(2), np.array([2.0, 0.0])) == INF


def test_fenchel_divergence(lasso_21):
    assert fenchel_divergence(lasso_21, np.zeros(2), np.array([1.0, 1.0])) == pytest.approx(0.5)
    # u = -grad f(Ax)
    x = np.array([1.0, 0.0])
    assert fenchel_divergence(lasso_21, x, np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-14)


def test_bregman_zero_at_gradient(lasso_21):
    x = np.array([0.3, -0.2])
    u = -(x - np.array([2.0, 1.0]))
    assert bregman_divergence(lasso_21, x, u) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("make", [random_lasso, random_logistic])
def test_fenchel_equals_bregman_on_feasible_pairs(make, rng):
    p = make(seed=3)
    for _ in range(50):
        x = rng.standard_normal(p.n)
        if isinstance(p.f, Logistic):
            u = rng.uniform(0.0, 1.0, p.m)
        else:
            u = rng.standard_normal(p.m)
        fen = fenchel_divergence(p, x, u)
        assert bregman_divergence(p, x, u) == pytest.approx(fen, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("make", [random_lasso, random_logistic])
def test_gap_equals_divergences_on_sequential_pairs(make):
    p = make(seed=5)
    pair = sequential_pair(p, p.g.level / 0.8)
    assert pair.linked
    gap = duality_gap(p, pair.x, pair.u)
    assert abs(gap - fenchel_divergence(p, pair.x, pair.u)) <= 1e-9 * (1.0 + gap)
    assert abs(gap - bregman_divergence(p, pair.x, pair.u)) <= 1e-9 * (1.0 + gap)


def test_refined_fenchel_young_least_squares(rng):
    f = LeastSquares(rng.standard_normal(6))
    for _ in range(500):
        z, zs = rng.standard_normal(6), rng.standard_normal(6)
        assert refined_fenchel_young_residual(f, z, zs) >= -1e-10


def test_refined_fenchel_young_logistic(rng):
    f = Logistic(6)
    for _ in range(500):
        z = -rng.uniform(0.0, 1.0, 6)
        zs = 3.0 * rng.standard_normal(6)
        assert refined_fenchel_young_residual(f, z, zs) >= -1e-10
    assert refined_fenchel_young_residual(f, np.full(6, 0.5), np.zeros(6)) == INF


def test_dual_feasible(lasso_21):
    assert dual_feasible(lasso_21, np.array([1.0, 1.0]))
    assert not dual_feasible(lasso_21, np.array([1.1, 0.0]))


def test_primal_dual_report(lasso_21):
    pair = dual_scaling(lasso_21, np.zeros(2))
    report = primal_dual_report(lasso_21, pair.x, pair.u)
    assert set(report) == {'primal', 'dual', 'gap', 'fenchel', 'bregman',
                           'primal_feasible', 'dual_feasible', 'linked'}
    assert report['primal'] == pytest.approx(2.5)
    assert report['gap'] == pytest.approx(report['primal'] - report['dual'])
    assert report['dual_feasible'] and report['linked']
    assert math.isfinite(report['bregman'])


def _random_elastic_net(seed):
    return random_lasso(seed=seed, family='elastic_net')


@pytest.mark.parametrize("make", [random_lasso, random_logistic, _random_elastic_net])
def test_gap_bounds_on_feasible_pairs(make, rng):
    p = make(seed=6)
    reference = prox_grad_solve(p, SolveOptions(gap_tolerance=1e-12))
    # ||u* - reference.u||^2 <= 2 gap_ref / alpha
    delta = math.sqrt(2.0 * reference.gap / p.alpha)
    for scale in (0.0, 0.5, 1.0, 3.0):
        x = scale * rng.standard_normal(p.n)
        pair = dual_scaling(p, x)
        gap = duality_gap(p, pair.x, pair.u)
        grad = p.f.gradient(np.asarray(p.A @ x).ravel())
        bound = 2.0 * gap / p.alpha

        residual = pair.u + grad
        assert residual @ residual <= bound + 1e-10 * (1.0 + bound)

        d1, d2 = reference.u - pair.u, reference.u + grad
        total = d1 @ d1 + d2 @ d2
        slack = 4.0 * delta * (math.sqrt(bound) + delta) + 1e-10 * (1.0 + bound)
        assert total <= bound + slack


def test_lasso_gap_closed_form_on_linked_pairs():
    p = random_lasso(seed=7)
    pairs = [dual_scaling(p, np.zeros(p.n)), sequential_pair(p, p.g.level / 0.6)]
    for pair in pairs:
        assert pair.linked
        w = p.f.y - np.asarray(p.A @ pair.x).ravel() - pair.u
        gap = duality_gap(p, pair.x, pair.u)
        assert gap == pytest.approx(0.5 * float(w @ w), rel=1e-9, abs=1e-9)
