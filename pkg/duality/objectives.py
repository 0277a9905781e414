"""Primal and dual objectives, the duality gap and the Fenchel/Bregman divergences.

All functions take a Problem and plain numpy vectors and return extended
reals: +inf for points outside dom(P) (or outside dom(f*)), -inf for the
dual objective at infeasible u.
"""
import logging
from typing import Dict

import numpy as np

from models.problem import Problem, SmoothPart
from utils.ext_real import INF, ExtReal, ext_real, ext_sum

logger = logging.getLogger(__name__)


def _image(p: Problem, x: np.ndarray) -> np.ndarray:
    return np.asarray(p.A @ x).ravel()


def _correlations(p: Problem, u: np.ndarray) -> np.ndarray:
    return np.asarray(p.A.T @ u).ravel()


def primal_objective(p: Problem, x: np.ndarray) -> ExtReal:
    x = p.check_primal(x)
    return ext_sum((p.g.value(x), p.f.value(_image(p, x))))


def dual_objective(p: Problem, u: np.ndarray) -> ExtReal:
    """D(u) = -f*(-u) - g*(A^T u), -inf when u is infeasible."""
    u = p.check_dual(u)
    fc = p.f.conjugate(-u)
    if fc == INF:
        return -INF
    gc = p.g.conjugate(_correlations(p, u))
    if gc == INF:
        return -INF
    return ext_real(-fc - gc)


def dual_feasible(p: Problem, u: np.ndarray) -> bool:
    return dual_objective(p, u) > -INF


def duality_gap(p: Problem, x: np.ndarray, u: np.ndarray) -> ExtReal:
    primal = primal_objective(p, x)
    dual = dual_objective(p, u)
    if primal == INF or dual == -INF:
        return INF
    gap = primal - dual
    if gap < 0.0:
        # weak duality: only roundoff can push the gap below zero
        if gap < -1e-9 * (1.0 + abs(primal)):
            logger.warning("negative duality gap %.3e (P=%.17g, D=%.17g)", gap, primal, dual)
        gap = 0.0
    return gap


def fenchel_divergence(p: Problem, x: np.ndarray, u: np.ndarray) -> ExtReal:
    """Fen(x, u) = f(Ax) + f*(-u) + <u|Ax>."""
    x = p.check_primal(x)
    u = p.check_dual(u)
    z = _image(p, x)
    fc = p.f.conjugate(-u)
    if fc == INF:
        return INF
    return ext_real(p.f.value(z) + fc + float(u @ z))


def bregman_divergence(p: Problem, x: np.ndarray, u: np.ndarray) -> ExtReal:
    """Breg(x, u) = f*(-u) - f*(grad f(Ax)) + <Ax|u + grad f(Ax)>."""
    x = p.check_primal(x)
    u = p.check_dual(u)
    z = _image(p, x)
    grad = p.f.gradient(z)
    fc = p.f.conjugate(-u)
    if fc == INF:
        return INF
    return ext_real(fc - p.f.conjugate(grad) + float(z @ (u + grad)))


def refined_fenchel_young_residual(f: SmoothPart, z: np.ndarray, zs: np.ndarray) -> ExtReal:
    """Residual of the strengthened Fenchel-Young inequality for h = f*.

    h is alpha-strongly convex, h* = f and grad h*(zs) = grad f(zs), so

        h(z) + h*(zs) - <zs|z> - (alpha / 2) ||z - grad f(zs)||^2 >= 0.

    Returns +inf when z lies outside dom(f*).
    """
    h = f.conjugate(z)
    if h == INF:
        return INF
    d = z - f.gradient(zs)
    return ext_real(h + f.value(zs) - float(zs @ z) - 0.5 * f.alpha * float(d @ d))


def primal_dual_report(p: Problem, x: np.ndarray, u: np.ndarray) -> Dict[str, object]:
    """Objective values and divergences at (x, u), for diagnostics.

    Returns:
        Dict with: primal, dual, gap, fenchel, bregman, primal_feasible,
        dual_feasible, linked
    """
    x = p.check_primal(x)
    u = p.check_dual(u)
    primal = primal_objective(p, x)
    dual = dual_objective(p, u)
    return {
        'primal': primal,
        'dual': dual,
        'gap': duality_gap(p, x, u),
        'fenchel': fenchel_divergence(p, x, u),
        'bregman': bregman_divergence(p, x, u),
        'primal_feasible': primal < INF,
        'dual_feasible': dual > -INF,
        'linked': bool(p.g.is_linked(x, _correlations(p, u))),
    }
