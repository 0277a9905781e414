"""Safe screening for separable l1-type regularizers and column reduction."""
import logging
from dataclasses import dataclass

import numpy as np

from models.errors import DimensionMismatch, WrongFamily
from models.geometry import Ball, ScreenMask
from models.problem import Problem

logger = logging.getLogger(__name__)

# Ties |a_j^T c| + r ||a_j|| = lambda are kept: strict test with this relative guard
SCREEN_TOL = 1e-9


def screen_l1(p: Problem, b: Ball) -> ScreenMask:
    """Flag coordinates j with sup_{u in B} |a_j^T u| < lambda.

    Over B(c, r) the supremum is |a_j^T c| + r ||a_j||; when it stays
    below the l1 threshold the optimality condition forces x*_j = 0.
    """
    threshold = p.g.threshold
    if threshold is None:
        raise WrongFamily(f"screening needs a separable l1-type regularizer, got {p.g.name}")
    if b.dimension != p.m:
        raise DimensionMismatch("ball center", p.m, b.dimension)

    correlations = np.abs(np.asarray(p.A.T @ b.center).ravel())
    bound = correlations + b.radius * p.column_norms
    flags = bound < threshold * (1.0 - SCREEN_TOL)
    return ScreenMask(flags, b.tag)


def screen_fraction(mask: ScreenMask) -> float:
    return mask.screened_count / mask.n if mask.n else 0.0


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """Problem restricted to the kept columns of a larger one."""
    problem: Problem
    kept: np.ndarray
    n_full: int

    def inflate(self, x: np.ndarray) -> np.ndarray:
        """Embed a reduced vector into R^n_full, with zeros on screened columns."""
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.kept.size:
            raise DimensionMismatch("reduced vector", self.kept.size, x.size)
        full = np.zeros(self.n_full)
        full[self.kept] = x
        return full


def reduce_problem(p: Problem, mask: ScreenMask) -> ReducedProblem:
    if mask.n != p.n:
        raise DimensionMismatch("screen mask", p.n, mask.n)
    kept = mask.kept_indices
    if kept.size == p.n:
        return ReducedProblem(p, kept, p.n)
    if kept.size == 0:
        logger.info("all %d columns screened, the solution is 0", p.n)
    return ReducedProblem(p.with_columns(kept), kept, p.n)
