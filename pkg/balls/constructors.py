"""Safe-ball constructors.

Every constructor returns a Ball guaranteed to contain the dual optimum
u* when its preconditions hold, and raises instead of returning an
unsafe or infinite ball when they do not:

    InfeasiblePair     (x, u) is outside dom(P) x dom(-D)
    LinkageViolated    the ball needs A^T u in dg(x) and it fails
    WrongFamily        the closed form only exists for another f or g
    NegativeRadicand   a radius radicand is negative beyond roundoff
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from duality.objectives import bregman_divergence, dual_feasible, duality_gap
from models.errors import InfeasiblePair, LinkageViolated, NegativeRadicand, WrongFamily
from models.geometry import Ball, PrimalDualPair
from models.problem import Problem
from problems.regularizers import NormRegularizer
from problems.smooth import LeastSquares, Logistic
from utils.ext_real import INF

logger = logging.getLogger(__name__)

# Radicands in [-RADICAND_TOL * max(1, scale), 0) are roundoff and clamp to 0
RADICAND_TOL = 1e-10

# Sequential pairs must satisfy u = -grad f(Ax) / gamma to this accuracy
SEQUENTIAL_TOL = 1e-8


def _checked_sqrt(radicand: float, tag: str, scale: float = 1.0) -> float:
    if radicand >= 0.0:
        return math.sqrt(radicand)
    if radicand >= -RADICAND_TOL * max(1.0, scale):
        logger.debug("%s ball: clamped radicand %.3e to 0", tag, radicand)
        return 0.0
    raise NegativeRadicand(tag, radicand)


def _prepare(p: Problem, x: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = p.check_primal(x)
    u = p.check_dual(u)
    return x, u, np.asarray(p.A @ x).ravel()


def _feasible_gap(p: Problem, x: np.ndarray, u: np.ndarray, tag: str) -> float:
    gap = duality_gap(p, x, u)
    if gap == INF:
        raise InfeasiblePair(f"{tag} ball: pair is outside dom(P) x dom(-D)")
    return gap


def _require_feasible_dual(p: Problem, u: np.ndarray, tag: str):
    if not dual_feasible(p, u):
        raise InfeasiblePair(f"{tag} ball: u is not dual feasible")


def _require_least_squares(p: Problem, tag: str) -> LeastSquares:
    if not isinstance(p.f, LeastSquares):
        raise WrongFamily(f"{tag} ball needs f = 0.5||y - .||^2, got {p.f.name}")
    return p.f


def _require_norm(p: Problem, tag: str) -> NormRegularizer:
    if not isinstance(p.g, NormRegularizer):
        raise WrongFamily(f"{tag} ball needs g = lambda * norm, got {p.g.name}")
    return p.g


def _require_logistic(p: Problem, tag: str) -> Logistic:
    if not isinstance(p.f, Logistic):
        raise WrongFamily(f"{tag} ball needs the logistic loss, got {p.f.name}")
    return p.f


def _require_linked(p: Problem, x: np.ndarray, u: np.ndarray, tag: str):
    if not p.g.is_linked(x, np.asarray(p.A.T @ u).ravel()):
        raise LinkageViolated(f"{tag} ball: A^T u is not in dg(x), the ball would not be safe")


def ryu_ball(p: Problem, x: np.ndarray, u: np.ndarray) -> Ball:
    """Smallest ball from the strengthened Fenchel-Young bound.

    center = (u - grad f(Ax)) / 2
    radius = sqrt(GAP(x, u) / alpha - ||u + grad f(Ax)||^2 / 4)
    """
    x, u, z = _prepare(p, x, u)
    gap = _feasible_gap(p, x, u, 'ryu')
    grad = p.f.gradient(z)
    s = u + grad
    scale = gap / p.alpha
    radius = _checked_sqrt(scale - 0.25 * float(s @ s), 'ryu', scale)
    return Ball(0.5 * (u - grad), radius, 'ryu')


def gap_ball(p: Problem, x: np.ndarray, u: np.ndarray) -> Ball:
    x, u, _ = _prepare(p, x, u)
    gap = _feasible_gap(p, x, u, 'gap')
    return Ball(u, math.sqrt(2.0 * gap / p.alpha), 'gap')


def xgap_ball(p: Problem, x: np.ndarray, u: np.ndarray) -> Ball:
    """GAP radius around -grad f(Ax) instead of u."""
    x, u, z = _prepare(p, x, u)
    gap = _feasible_gap(p, x, u, 'xgap')
    return Ball(-p.f.gradient(z), math.sqrt(2.0 * gap / p.alpha), 'xgap')


def t_star(p: Problem, x: np.ndarray, u: np.ndarray) -> float:
    """Scaling t >= 0 of x minimizing the RYU radius at (t x, u).

    t* = max(0, (<Ax|y + u> - 2 lambda ||x||) / ||Ax||^2), and 0 when Ax = 0.
    """
    f = _require_least_squares(p, 'dynamic_edpp')
    g = _require_norm(p, 'dynamic_edpp')
    x, u, z = _prepare(p, x, u)
    zz = float(z @ z)
    if zz == 0.0:
        return 0.0
    t = (float(z @ (f.y + u)) - 2.0 * g.lam * g.norm.value(x)) / zz
    return max(0.0, t)


def dynamic_edpp_ball(p: Problem, x: np.ndarray, u: np.ndarray) -> Ball:
    """RYU ball at the best rescaling t* x of the primal point."""
    f = _require_least_squares(p, 'dynamic_edpp')
    _require_norm(p, 'dynamic_edpp')
    x, u, z = _prepare(p, x, u)
    _feasible_gap(p, x, u, 'dynamic_edpp')
    t = t_star(p, x, u)
    tz = t * z
    r = f.y - u
    radicand = 0.25 * (float(r @ r) - float(tz @ tz))
    radius = _checked_sqrt(radicand, 'dynamic_edpp', 0.25 * float(r @ r))
    return Ball(0.5 * (f.y + u - tz), radius, 'dynamic_edpp')


def fne_ball(p: Problem, x: np.ndarray, u: np.ndarray, tag: str = 'fne') -> Ball:
    """Ball for least squares at a linked pair: <u|Ax> = g(x) + g*(A^T u).

    center = u + (y - Ax - u) / 2, radius = ||y - Ax - u|| / 2
    """
    f = _require_least_squares(p, tag)
    x, u, z = _prepare(p, x, u)
    _require_feasible_dual(p, u, tag)
    _require_linked(p, x, u, tag)
    w = f.y - z - u
    return Ball(u + 0.5 * w, 0.5 * float(np.linalg.norm(w)), tag)


def sasvi_ball(p: Problem, u: np.ndarray) -> Ball:
    """FNE ball at x = 0: center (y + u) / 2, radius ||y - u|| / 2."""
    f = _require_least_squares(p, 'sasvi')
    u = p.check_dual(u)
    _require_feasible_dual(p, u, 'sasvi')
    _require_linked(p, np.zeros(p.n), u, 'sasvi')
    return Ball(0.5 * (f.y + u), 0.5 * float(np.linalg.norm(f.y - u)), 'sasvi')


def edpp_ball(p: Problem, pair: PrimalDualPair) -> Ball:
    """FNE ball at a sequential pair."""
    if pair.gamma is None:
        raise LinkageViolated("edpp ball needs a sequential pair (gamma is not set)")
    return fne_ball(p, pair.x, pair.u, tag='edpp')


def safe_ball(p: Problem, u: np.ndarray) -> Ball:
    """Center y, radius ||y - u||: contains the RYU ball at (0, u)."""
    f = _require_least_squares(p, 'safe')
    u = p.check_dual(u)
    _require_feasible_dual(p, u, 'safe')
    _require_linked(p, np.zeros(p.n), u, 'safe')
    return Ball(f.y, float(np.linalg.norm(f.y - u)), 'safe')


def _sequential_breg(p: Problem, pair: PrimalDualPair, gamma: Optional[float], tag: str) -> Tuple[float, float]:
    _require_logistic(p, tag)
    gamma = pair.gamma if gamma is None else float(gamma)
    if gamma is None or gamma <= 0:
        raise LinkageViolated(f"{tag} ball needs a sequential pair with gamma > 0")
    x, u, z = _prepare(p, pair.x, pair.u)
    _require_feasible_dual(p, u, tag)
    _require_linked(p, x, u, tag)
    residual = float(np.max(np.abs(gamma * u + p.f.gradient(z)), initial=0.0))
    if residual > SEQUENTIAL_TOL * gamma:
        raise LinkageViolated(f"{tag} ball: u differs from -grad f(Ax) / gamma by {residual:.3e}")
    breg = bregman_divergence(p, x, u)
    if breg == INF:
        raise InfeasiblePair(f"{tag} ball: Bregman divergence is infinite")
    return gamma, breg


def slores_ball(p: Problem, pair: PrimalDualPair, gamma: Optional[float] = None) -> Ball:
    """center gamma u, radius sqrt(Breg(x, u) / 2) for logistic sequential pairs."""
    gamma, breg = _sequential_breg(p, pair, gamma, 'slores')
    u = p.check_dual(pair.u)
    return Ball(gamma * u, _checked_sqrt(0.5 * breg, 'slores', breg), 'slores')


def sfer_ball(p: Problem, pair: PrimalDualPair, gamma: Optional[float] = None) -> Ball:
    """center (1 + gamma) u / 2, radius sqrt(Breg / 4 - ||(1 - gamma) u||^2 / 4)."""
    gamma, breg = _sequential_breg(p, pair, gamma, 'sfer')
    u = p.check_dual(pair.u)
    d = (1.0 - gamma) * u
    radius = _checked_sqrt(0.25 * breg - 0.25 * float(d @ d), 'sfer', 0.25 * breg)
    return Ball(0.5 * (1.0 + gamma) * u, radius, 'sfer')
