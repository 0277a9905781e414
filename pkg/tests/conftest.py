"""Shared problems and instances for the test suite."""
import numpy as np
import pytest

from harness.loaders import fold_labels, generate_synthetic
from models.experiment import SyntheticSpec
from models.problem import LassoSpec
from problems.builders import make_lasso, problem_at_fraction


def identity_lasso(y=(2.0, 1.0), lam=1.0):
    """0.5||y - x||^2 + lam ||x||_1 on R^2: solution soft_threshold(y, lam)."""
    return make_lasso(LassoSpec(np.eye(2), np.asarray(y, dtype=float), lam))


def random_lasso(seed=0, m=20, n=30, fraction=0.5, family='lasso'):
    A, y = generate_synthetic(SyntheticSpec(m=m, n=n, seed=seed))
    return problem_at_fraction(family, A, y, fraction)


def random_logistic(seed=0, m=20, n=15, fraction=0.5):
    A, labels = generate_synthetic(SyntheticSpec(m=m, n=n, seed=seed, labels=True))
    return problem_at_fraction('logistic', fold_labels(A, labels), None, fraction)


@pytest.fixture
def lasso_21():
    """A = I, y = (2, 1), lambda = 1: x* = (1, 0), u* = (1, 1)."""
    return identity_lasso()


@pytest.fixture
def lasso_half():
    """A = I, y = (2, 0.5), lambda = 1.5: x* = (0.5, 0), u* = (1.5, 0.5)."""
    return identity_lasso(y=(2.0, 0.5), lam=1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
