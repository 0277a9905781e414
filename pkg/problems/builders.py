"""Builders for the shipped problem families."""
import logging
from typing import Optional, Union

import numpy as np

from models.problem import (
    ElasticNetSpec,
    LassoSpec,
    LogisticL1Spec,
    NonNegativeLassoSpec,
    Problem,
)
from problems.regularizers import ElasticNet, NonNegativeL1, Norm, NormRegularizer, get_norm
from problems.smooth import LeastSquares, Logistic
from utils.linalg import as_design_matrix

logger = logging.getLogger(__name__)


# Family name -> short description, shown by the CLI and the service
PROBLEM_FAMILIES = {
    'lasso': "0.5||y - Ax||^2 + lambda ||x||_1",
    'l2_lasso': "0.5||y - Ax||^2 + lambda ||x||_2",
    'logistic': "sum log(1 + exp(-(Ax)_i)) + lambda ||x||_1, labels folded into A",
    'elastic_net': "0.5||y - Ax||^2 + lambda1 ||x||_1 + (lambda2 / 2) ||x||^2",
    'nonneg_lasso': "0.5||y - Ax||^2 + lambda ||x||_1 over x >= 0",
}


def make_lasso(spec: LassoSpec) -> Problem:
    norm = get_norm(spec.norm_kind)
    name = 'lasso' if norm.name == 'l1' else f'{norm.name}_lasso'
    return Problem(spec.A, LeastSquares(spec.y), NormRegularizer(spec.lam, norm), name=name)


def make_norm_lasso(A, y: np.ndarray, lam: float, norm: Union[str, Norm] = 'l1') -> Problem:
    """Least squares with lambda times an arbitrary shipped norm."""
    return make_lasso(LassoSpec(A, y, lam, norm_kind=norm))


def make_logistic(spec: LogisticL1Spec) -> Problem:
    A = as_design_matrix(spec.A)
    return Problem(A, Logistic(A.shape[0]), NormRegularizer(spec.lam), name='logistic')


def make_elastic_net(spec: ElasticNetSpec) -> Problem:
    return Problem(spec.A, LeastSquares(spec.y), ElasticNet(spec.lam1, spec.lam2), name='elastic_net')


def make_nonneg_lasso(spec: NonNegativeLassoSpec) -> Problem:
    return Problem(spec.A, LeastSquares(spec.y), NonNegativeL1(spec.lam), name='nonneg_lasso')


def lambda_max(p: Problem) -> float:
    """Smallest regularization level at which x = 0 solves the problem.

    Returns:
        ||A^T (-grad f(0))|| measured in the regularizer's dual norm.
    """
    w = p.A.T @ (-p.f.gradient(np.zeros(p.m)))
    return float(p.g.dual_norm(np.asarray(w).ravel()))


def build_problem(family: str, A, y: Optional[np.ndarray], lam: float,
                  lam2: Optional[float] = None) -> Problem:
    """Build a problem of the named family at an absolute level lam.

    For logistic, y is ignored: labels must already be folded into A.
    For elastic_net, lam2 defaults to lam.
    """
    if family == 'lasso':
        return make_lasso(LassoSpec(A, y, lam))
    if family == 'l2_lasso':
        return make_lasso(LassoSpec(A, y, lam, norm_kind='l2'))
    if family == 'logistic':
        return make_logistic(LogisticL1Spec(A, lam))
    if family == 'elastic_net':
        return make_elastic_net(ElasticNetSpec(A, y, lam, lam if lam2 is None else lam2))
    if family == 'nonneg_lasso':
        return make_nonneg_lasso(NonNegativeLassoSpec(A, y, lam))
    raise ValueError(f"unknown problem family '{family}', expected one of {sorted(PROBLEM_FAMILIES)}")


def problem_at_fraction(family: str, A, y: Optional[np.ndarray], fraction: float,
                        lam2_ratio: float = 1.0) -> Problem:
    """Build the family at lambda = fraction * lambda_max.

    lambda_max is computed on a probe at level 1; the elastic net keeps
    lambda2 = lam2_ratio * lambda1.
    """
    if fraction <= 0:
        raise ValueError(f"lambda fraction must be positive, got {fraction}")
    probe = build_problem(family, A, y, 1.0, lam2=lam2_ratio)
    lmax = lambda_max(probe)
    if lmax == 0.0:
        logger.warning("lambda_max is 0 for %s; using lambda = %g", family, fraction)
        lmax = 1.0
    return probe.with_level(fraction * lmax)
