import numpy as np
import pytest

from duality.objectives import dual_feasible, duality_gap
from models.solve import SolveOptions
from problems.builders import lambda_max
from screening.pairs import dual_scaling, sequential_pair, verify_linkage
from tests.conftest import identity_lasso, random_lasso, random_logistic


def test_dual_scaling_at_zero(lasso_21):
    pair = dual_scaling(lasso_21, np.zeros(2))
    np.testing.assert_allclose(pair.u, [1.0, 0.5])
    assert dual_feasible(lasso_21, pair.u)
    assert pair.linked
    assert pair.gamma is None


def test_dual_scaling_at_optimum(lasso_21):
    pair = dual_scaling(lasso_21, np.array([1.0, 0.0]))
    np.testing.assert_allclose(pair.u, [1.0, 1.0])


def test_dual_scaling_unconstrained():
    p = identity_lasso(lam=10.0)
    x = np.array([0.5, -0.25])
    np.testing.assert_allclose(dual_scaling(p, x).u, [1.5, 1.25])


def test_dual_scaling_is_feasible_for_every_family(rng):
    for p in (random_lasso(seed=1), random_logistic(seed=1),
              random_lasso(seed=1, family='elastic_net'), random_lasso(seed=1, family='nonneg_lasso'),
              random_lasso(seed=1, family='l2_lasso')):
        for _ in range(10):
            x = rng.standard_normal(p.n)
            if p.g.name == 'nonneg_l1':
                x = np.abs(x)
            pair = dual_scaling(p, x)
            assert dual_feasible(p, pair.u)
            assert duality_gap(p, pair.x, pair.u) >= 0.0


def test_verify_linkage(lasso_21):
    assert verify_linkage(lasso_21, np.zeros(2), np.array([0.3, -0.9]))
    assert verify_linkage(lasso_21, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert not verify_linkage(lasso_21, np.array([1.0, 0.0]), np.array([0.5, 0.0]))


def test_sequential_pair_at_same_level(lasso_21):
    pair = sequential_pair(lasso_21, 1.0)
    assert pair.gamma == pytest.approx(1.0)
    np.testing.assert_allclose(pair.x, [1.0, 0.0], atol=1e-10)
    np.testing.assert_allclose(pair.u, [1.0, 1.0], atol=1e-10)
    assert duality_gap(lasso_21, pair.x, pair.u) <= 1e-10


def test_sequential_pair_above_lambda_max(lasso_21):
    lam0 = lambda_max(lasso_21)
    pair = sequential_pair(lasso_21, lam0)
    assert pair.gamma == pytest.approx(2.0)
    np.testing.assert_allclose(pair.x, [0.0, 0.0])
    np.testing.assert_allclose(pair.u, [1.0, 0.5])
    assert pair.linked


def test_sequential_pair_orthonormal_oracle(lasso_21):
    pair = sequential_pair(lasso_21, 1.5)
    # x at lambda0 is soft_threshold(y, 1.5)
    np.testing.assert_allclose(pair.x, [0.5, 0.0], atol=1e-10)
    np.testing.assert_allclose(pair.u, [1.0, 2.0 / 3.0], atol=1e-10)
    assert pair.gamma == pytest.approx(1.5)
    assert pair.linked


def test_sequential_pair_random_is_linked():
    p = random_lasso(seed=11)
    pair = sequential_pair(p, p.g.level / 0.7, options=SolveOptions(max_iters=50000))
    assert pair.linked
    assert dual_feasible(p, pair.u)


def test_sequential_pair_rejects_bad_level(lasso_21):
    with pytest.raises(ValueError):
        sequential_pair(lasso_21, 0.0)
