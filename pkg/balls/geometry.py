"""Membership and inclusion tests for Euclidean balls."""
import numpy as np

from duality.objectives import duality_gap
from models.errors import DimensionMismatch, InfeasiblePair
from models.geometry import Ball
from models.problem import Problem
from utils.ext_real import INF

# Relative slack on ||v - c|| <= r and on ||c_a - c_b|| + r_a <= r_b
BALL_TOL = 1e-9


def contains(b: Ball, v: np.ndarray) -> bool:
    v = np.asarray(v, dtype=float).ravel()
    if v.size != b.dimension:
        raise DimensionMismatch("point", b.dimension, v.size)
    return float(np.linalg.norm(v - b.center)) <= b.radius + BALL_TOL * (1.0 + b.radius)


def is_subset(a: Ball, b: Ball) -> bool:
    """Exact inclusion test for Euclidean balls: ||c_a - c_b|| + r_a <= r_b."""
    if a.dimension != b.dimension:
        raise DimensionMismatch("ball", a.dimension, b.dimension)
    return inclusion_slack(a, b) >= -BALL_TOL * (1.0 + b.radius)


def inclusion_slack(a: Ball, b: Ball) -> float:
    """r_b - ||c_a - c_b|| - r_a; positive when a sits strictly inside b."""
    if a.dimension != b.dimension:
        raise DimensionMismatch("ball", a.dimension, b.dimension)
    return b.radius - float(np.linalg.norm(a.center - b.center)) - a.radius


def ryu_membership(p: Problem, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> bool:
    """Quadratic form of the RYU ball: ||v - u||^2 + ||v + grad f(Ax)||^2 <= 2 GAP / alpha."""
    x = p.check_primal(x)
    u = p.check_dual(u)
    v = p.check_dual(v)
    gap = duality_gap(p, x, u)
    if gap == INF:
        raise InfeasiblePair("ryu membership: pair is outside dom(P) x dom(-D)")
    grad = p.f.gradient(np.asarray(p.A @ x).ravel())
    d1 = v - u
    d2 = v + grad
    bound = 2.0 * gap / p.alpha
    return float(d1 @ d1 + d2 @ d2) <= bound + BALL_TOL * (1.0 + bound)
