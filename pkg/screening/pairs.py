"""Primal-dual pairs fed to the ball constructors."""
import logging
from dataclasses import replace
from typing import Optional

import numpy as np

from models.geometry import PrimalDualPair
from models.problem import Problem
from models.solve import SolveOptions

logger = logging.getLogger(__name__)


def verify_linkage(p: Problem, x: np.ndarray, u: np.ndarray) -> bool:
    """Whether A^T u lies in dg(x), using the regularizer's tolerances."""
    x = p.check_primal(x)
    u = p.check_dual(u)
    return bool(p.g.is_linked(x, np.asarray(p.A.T @ u).ravel()))


def dual_scaling(p: Problem, x: np.ndarray) -> PrimalDualPair:
    """Feasible dual point s * (-grad f(Ax)) with the largest s in (0, 1].

    For the logistic loss -grad f(Ax) already lies in (0, 1)^m and
    shrinking keeps it there, so only the g* constraint binds.
    """
    x = p.check_primal(x)
    v = -p.f.gradient(np.asarray(p.A @ x).ravel())
    s = p.g.dual_scale_factor(np.asarray(p.A.T @ v).ravel())
    u = s * v
    return PrimalDualPair(x, u, linked=verify_linkage(p, x, u))


def sequential_pair(p: Problem, lambda0: float, tol: float = 1e-10,
                    options: Optional[SolveOptions] = None) -> PrimalDualPair:
    """Pair (x*_gamma, -grad f(A x*_gamma) / gamma) with gamma = lambda0 / lambda.

    x*_gamma solves the problem at level lambda0, computed on the
    equivalent form gamma^{-1} f + g so the solver's own dual point is
    exactly the rescaled gradient.

    Raises:
        SolverFailed: the subproblem did not reach `tol`.
    """
    from solvers.prox_grad import prox_grad_solve

    if not lambda0 > 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    gamma = lambda0 / p.g.level
    sub = p.rescaled(gamma)

    opts = options or SolveOptions()
    opts = replace(opts, gap_tolerance=tol, screening=None, raise_on_failure=True)
    result = prox_grad_solve(sub, opts)

    x = result.x
    u = -sub.f.gradient(np.asarray(p.A @ x).ravel())
    linked = verify_linkage(p, x, u)
    if not linked:
        logger.warning("sequential pair at gamma=%.6g failed the linkage check (gap %.3e)",
                       gamma, result.gap)
    logger.debug("sequential pair: gamma=%.6g, %d iterations, gap %.3e",
                 gamma, result.iterations, result.gap)
    return PrimalDualPair(x, u, linked=linked, gamma=gamma)
