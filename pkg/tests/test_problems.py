import math

import numpy as np
import pytest
import scipy.sparse as sp

from models.errors import DimensionMismatch
from models.problem import ElasticNetSpec, LassoSpec, LogisticL1Spec, Problem
from problems.builders import (
    build_problem,
    lambda_max,
    make_elastic_net,
    make_logistic,
    make_norm_lasso,
    problem_at_fraction,
)
from problems.regularizers import ElasticNet, NonNegativeL1, NormRegularizer, L2_NORM, get_norm
from problems.smooth import LeastSquares, Logistic, ScaledSmooth
from duality.objectives import dual_feasible
from utils.ext_real import INF, ext_real, ext_sum
from utils.linalg import as_design_matrix, spectral_norm_sq


def test_least_squares_gradient(lasso_21):
    np.testing.assert_allclose(lasso_21.f.gradient(np.zeros(2)), [-2.0, -1.0])


def test_l1_conjugate_is_box_indicator(lasso_21):
    assert lasso_21.g.conjugate(np.array([0.5, 0.5])) == 0.0
    assert lasso_21.g.conjugate(np.array([2.0, 0.0])) == INF


def test_l1_linkage():
    g = NormRegularizer(1.0)
    assert g.is_linked(np.array([1.0, 0.0]), np.array([1.0, 0.3]))
    assert not g.is_linked(np.array([1.0, 0.0]), np.array([0.5, 0.0]))
    assert not g.is_linked(np.array([1.0, 0.0]), np.array([1.0, 1.5]))


def test_logistic_at_zero():
    f = Logistic(3)
    assert f.value(np.zeros(3)) == pytest.approx(3 * math.log(2))
    np.testing.assert_allclose(f.gradient(np.zeros(3)), [-0.5, -0.5, -0.5])
    assert f.conjugate(-np.full(3, 0.5)) == pytest.approx(-3 * math.log(2))
    assert f.conjugate(-np.array([0.5, 1.5, 0.5])) == INF


def test_logistic_conjugate_matches_numeric_sup():
    f = Logistic(1)
    z = np.linspace(-30.0, 30.0, 200001)
    for s in (0.1, 0.5, 0.8):
        numeric = np.max(-s * z - np.logaddexp(0.0, -z))
        assert f.conjugate(np.array([-s])) == pytest.approx(numeric, abs=1e-6)


def test_elastic_net_conjugate():
    assert ElasticNet(1.0, 1.0).conjugate(np.array([0.5])) == 0.0
    assert ElasticNet(1.0, 1.0).conjugate(np.array([3.0])) == pytest.approx(2.0)
    assert ElasticNet(1.0, 2.0).conjugate(np.array([2.0])) == pytest.approx(0.25)


def test_elastic_net_prox_minimizes_1d():
    g = ElasticNet(1.0, 2.0)
    grid = np.linspace(-5.0, 5.0, 100001)
    objective = 0.5 * (grid - 3.0) ** 2 + np.abs(grid) + grid ** 2
    assert g.prox(np.array([3.0]), 1.0)[0] == pytest.approx(grid[np.argmin(objective)], abs=1e-4)


def test_nonnegative_l1():
    g = NonNegativeL1(1.0)
    assert g.value(np.array([-1.0, 0.0])) == INF
    np.testing.assert_allclose(g.prox(np.array([1.0, -1.0]), 0.5), [0.5, 0.0])
    # only positive correlations are constrained
    assert g.conjugate(np.array([-5.0, 1.0])) == 0.0
    assert g.conjugate(np.array([1.5, 0.0])) == INF


def test_l2_norm_regularizer():
    g = NormRegularizer(1.0, L2_NORM)
    np.testing.assert_allclose(g.prox(np.array([3.0, 4.0]), 1.0), [2.4, 3.2])
    np.testing.assert_allclose(g.prox(np.array([0.3, 0.4]), 1.0), [0.0, 0.0])
    assert g.threshold is None
    assert g.is_linked(np.array([3.0, 4.0]), np.array([0.6, 0.8]))


def test_get_norm_unknown():
    with pytest.raises(ValueError, match="unknown norm"):
        get_norm('linf')


def test_scaled_smooth_conjugate(rng):
    f = LeastSquares(rng.standard_normal(4))
    scaled = ScaledSmooth(f, 2.5)
    v = rng.standard_normal(4)
    assert scaled.conjugate(v) == pytest.approx(2.5 * f.conjugate(v / 2.5))
    assert scaled.alpha == pytest.approx(1.0 / 2.5)


def test_dual_feasibility():
    p = make_norm_lasso(np.eye(2), np.array([2.0, 1.0]), 1.0)
    assert dual_feasible(p, np.array([1.0, 1.0]))
    assert not dual_feasible(p, np.array([1.1, 0.0]))

    logistic = make_logistic(LogisticL1Spec(0.1 * np.ones((3, 2)), 10.0))
    assert dual_feasible(logistic, np.array([0.0, 1.0, 0.5]))
    assert not dual_feasible(logistic, np.array([0.0, 1.5, 0.5]))


def test_problem_dimension_check():
    with pytest.raises(DimensionMismatch):
        Problem(np.eye(2), LeastSquares([1.0, 2.0, 3.0]), NormRegularizer(1.0))
    with pytest.raises(DimensionMismatch):
        LassoSpec(np.eye(2), np.ones(3), 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        LassoSpec(np.eye(2), np.ones(2), 0.0)
    with pytest.raises(ValueError):
        ElasticNetSpec(np.eye(2), np.ones(2), 1.0, -1.0)


def test_lambda_max(lasso_21):
    assert lambda_max(lasso_21) == pytest.approx(2.0)
    A = np.array([[1.0, 0.0], [1.0, 2.0]])
    logistic = make_logistic(LogisticL1Spec(A, 1.0))
    assert lambda_max(logistic) == pytest.approx(1.0)


def test_problem_at_fraction():
    p = problem_at_fraction('lasso', np.eye(2), np.array([2.0, 1.0]), 0.5)
    assert p.g.level == pytest.approx(1.0)


def test_elastic_net_level_scales_both_terms():
    p = problem_at_fraction('elastic_net', np.eye(2), np.array([2.0, 1.0]), 0.5, lam2_ratio=2.0)
    assert p.g.lam1 == pytest.approx(1.0)
    assert p.g.lam2 == pytest.approx(2.0)
    direct = make_elastic_net(ElasticNetSpec(np.eye(2), np.array([2.0, 1.0]), 1.0, 2.0))
    assert direct.g.conjugate(np.array([3.0, 0.0])) == pytest.approx(p.g.conjugate(np.array([3.0, 0.0])))


def test_build_problem_families():
    A, y = np.eye(3), np.ones(3)
    for family in ('lasso', 'l2_lasso', 'elastic_net', 'nonneg_lasso'):
        assert build_problem(family, A, y, 0.5).g.level == pytest.approx(0.5)
    assert isinstance(build_problem('logistic', A, None, 0.5).f, Logistic)
    with pytest.raises(ValueError, match="unknown problem family"):
        build_problem('ridge', A, y, 0.5)


def test_rescaled_problem_alpha(lasso_21):
    assert lasso_21.rescaled(2.0).alpha == pytest.approx(2.0)
    with pytest.raises(ValueError):
        lasso_21.rescaled(0.0)


def test_with_columns(lasso_21):
    sub = lasso_21.with_columns(np.array([1]))
    assert (sub.m, sub.n) == (2, 1)
    np.testing.assert_allclose(sub.column_norms, [1.0])


def test_design_matrix_layout():
    dense = as_design_matrix(np.ones((4, 3)))
    assert isinstance(dense, np.ndarray) and dense.flags['F_CONTIGUOUS']
    sparse = as_design_matrix(np.eye(10))
    assert sp.isspmatrix_csc(sparse)


def test_spectral_norm_sq():
    assert spectral_norm_sq(np.diag([3.0, 1.0])) == pytest.approx(9.0)
    assert spectral_norm_sq(sp.csc_matrix((3, 2))) == 0.0


def test_ext_real():
    assert ext_sum([1.0, INF]) == INF
    assert ext_sum([1.0, 2.0]) == 3.0
    with pytest.raises(ValueError):
        ext_real(float('nan'))
    with pytest.raises(ValueError):
        ext_sum([INF, -INF])


def test_with_level_keeps_data():
    p = make_elastic_net(ElasticNetSpec(np.eye(2), np.array([2.0, 1.0]), 1.0, 0.5))
    q = p.with_level(3.0)
    assert q.A is p.A and q.f is p.f
    assert q.g.lam1 == pytest.approx(3.0)
    assert q.g.lam2 == pytest.approx(1.5)
    with pytest.raises(ValueError):
        p.with_level(0.0)


@pytest.mark.parametrize("f", [LeastSquares(np.array([0.3, -1.2, 2.0, 0.7])), Logistic(4)],
                         ids=['least_squares', 'logistic'])
def test_gradient_matches_central_differences(f, rng):
    h = 1e-6
    for _ in range(5):
        z = 2.0 * rng.standard_normal(f.dimension)
        numeric = np.array([(f.value(z + h * e) - f.value(z - h * e)) / (2 * h)
                            for e in np.eye(f.dimension)])
        np.testing.assert_allclose(f.gradient(z), numeric, atol=1e-6)


@pytest.mark.parametrize("f", [LeastSquares(np.array([0.3, -1.2, 2.0, 0.7])), Logistic(4)],
                         ids=['least_squares', 'logistic'])
def test_gradient_lipschitz_bound(f, rng):
    for _ in range(200):
        z, w = 3.0 * rng.standard_normal(f.dimension), 3.0 * rng.standard_normal(f.dimension)
        lhs = np.linalg.norm(f.gradient(z) - f.gradient(w))
        assert lhs <= (1.0 / f.alpha + 1e-8) * np.linalg.norm(z - w)


def test_l1_conjugate_matches_grid_sup():
    g = NormRegularizer(1.5)
    grid = np.linspace(-50.0, 50.0, 100001)
    for w in (-1.4, -0.3, 0.0, 0.9, 1.5):
        assert g.conjugate(np.array([w])) == pytest.approx(np.max(w * grid - 1.5 * np.abs(grid)), abs=1e-9)
    for w in (-1.6, 2.0):
        # the grid sup grows without bound as the grid widens
        assert np.max(w * grid - 1.5 * np.abs(grid)) >= 50.0 * (abs(w) - 1.5) - 1e-9
        assert g.conjugate(np.array([w])) == INF
