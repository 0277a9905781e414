"""Registry of ball constructors, keyed by tag.

Each entry records which problems the closed form exists for and what
the pair must satisfy, so callers can build "every applicable ball"
without knowing constructor signatures.
"""
from typing import Callable, Dict, List

import numpy as np

from balls.constructors import (
    dynamic_edpp_ball,
    edpp_ball,
    fne_ball,
    gap_ball,
    ryu_ball,
    safe_ball,
    sasvi_ball,
    sfer_ball,
    slores_ball,
    xgap_ball,
)
from models.geometry import Ball, PrimalDualPair
from models.problem import Problem
from problems.regularizers import NormRegularizer
from problems.smooth import LeastSquares, Logistic

BallBuilder = Callable[[Problem, PrimalDualPair], Ball]


def _any_family(p: Problem) -> bool:
    return True


def _least_squares(p: Problem) -> bool:
    return isinstance(p.f, LeastSquares)


def _norm_least_squares(p: Problem) -> bool:
    return isinstance(p.f, LeastSquares) and isinstance(p.g, NormRegularizer)


def _logistic(p: Problem) -> bool:
    return isinstance(p.f, Logistic)


FAMILY_CHECKS = {
    'any': _any_family,
    'least_squares': _least_squares,
    'norm_least_squares': _norm_least_squares,
    'logistic': _logistic,
}


def _any_pair(p: Problem, pair: PrimalDualPair) -> bool:
    return True


def _linked_pair(p: Problem, pair: PrimalDualPair) -> bool:
    return p.g.is_linked(pair.x, np.asarray(p.A.T @ pair.u).ravel())


def _linked_at_zero(p: Problem, pair: PrimalDualPair) -> bool:
    return p.g.is_linked(np.zeros(p.n), np.asarray(p.A.T @ pair.u).ravel())


def _sequential_pair(p: Problem, pair: PrimalDualPair) -> bool:
    return pair.gamma is not None and _linked_pair(p, pair)


PAIR_CHECKS = {
    'any': _any_pair,
    'linked': _linked_pair,
    'linked_at_zero': _linked_at_zero,
    'sequential': _sequential_pair,
}


BALLS: Dict[str, Dict] = {
    'ryu': {
        'description': "Strengthened Fenchel-Young ball, centered between u and -grad f(Ax)",
        'family': 'any',
        'pair': 'any',
        'build': lambda p, pair: ryu_ball(p, pair.x, pair.u),
    },
    'gap': {
        'description': "Duality-gap ball centered at u",
        'family': 'any',
        'pair': 'any',
        'build': lambda p, pair: gap_ball(p, pair.x, pair.u),
    },
    'xgap': {
        'description': "Duality-gap ball centered at -grad f(Ax)",
        'family': 'any',
        'pair': 'any',
        'build': lambda p, pair: xgap_ball(p, pair.x, pair.u),
    },
    'dynamic_edpp': {
        'description': "RYU ball at the optimal rescaling t* x (least squares, norm penalty)",
        'family': 'norm_least_squares',
        'pair': 'any',
        'build': lambda p, pair: dynamic_edpp_ball(p, pair.x, pair.u),
    },
    'fne': {
        'description': "Least-squares ball at a linked pair",
        'family': 'least_squares',
        'pair': 'linked',
        'build': lambda p, pair: fne_ball(p, pair.x, pair.u),
    },
    'sasvi': {
        'description': "FNE ball at x = 0",
        'family': 'least_squares',
        'pair': 'linked_at_zero',
        'build': lambda p, pair: sasvi_ball(p, pair.u),
    },
    'edpp': {
        'description': "FNE ball at a sequential pair",
        'family': 'least_squares',
        'pair': 'sequential',
        'build': edpp_ball,
    },
    'safe': {
        'description': "Ball centered at y with radius ||y - u||",
        'family': 'least_squares',
        'pair': 'linked_at_zero',
        'build': lambda p, pair: safe_ball(p, pair.u),
    },
    'slores': {
        'description': "Logistic ball centered at gamma u (sequential pairs)",
        'family': 'logistic',
        'pair': 'sequential',
        'build': lambda p, pair: slores_ball(p, pair),
    },
    'sfer': {
        'description': "Logistic ball centered at (1 + gamma) u / 2 (sequential pairs)",
        'family': 'logistic',
        'pair': 'sequential',
        'build': lambda p, pair: sfer_ball(p, pair),
    },
}


def is_applicable(tag: str, p: Problem, pair: PrimalDualPair) -> bool:
    entry = _entry(tag)
    return FAMILY_CHECKS[entry['family']](p) and PAIR_CHECKS[entry['pair']](p, pair)


def supports_family(tag: str, p: Problem) -> bool:
    return FAMILY_CHECKS[_entry(tag)['family']](p)


def pair_requirement(tag: str) -> str:
    return _entry(tag)['pair']


def applicable_balls(p: Problem, pair: PrimalDualPair) -> List[str]:
    """Tags of every constructor whose family and pair requirements hold."""
    return [tag for tag in BALLS if is_applicable(tag, p, pair)]


def build_ball(tag: str, p: Problem, pair: PrimalDualPair) -> Ball:
    """Build the ball registered under tag; constructor errors propagate."""
    return _entry(tag)['build'](p, pair)


def describe_balls() -> Dict[str, Dict[str, str]]:
    """Registry without the builders, for the CLI and the service."""
    return {
        tag: {key: value for key, value in entry.items() if key != 'build'}
        for tag, entry in BALLS.items()
    }


def _entry(tag: str) -> Dict:
    try:
        return BALLS[tag]
    except KeyError:
        raise ValueError(f"unknown ball '{tag}', expected one of {sorted(BALLS)}") from None
