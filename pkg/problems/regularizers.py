"""Regularizers g: norms, elastic net and the nonnegative l1 penalty."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from models.problem import LocalModel, Regularizer
from solvers.prox import block_soft_threshold, soft_threshold
from utils.ext_real import INF, ExtReal

# Relative slack on dual feasibility: ||A^T u||_* <= lambda (1 + FEASIBILITY_TOL)
FEASIBILITY_TOL = 1e-9

# Relative slack on <w|x> = lambda ||x||, scaled by (1 + lambda ||x||)
LINKAGE_TOL = 1e-8


def _max_abs(w: np.ndarray) -> float:
    return float(np.max(np.abs(w))) if w.size else 0.0


@dataclass(frozen=True)
class Norm:
    """A norm given by its value, its dual norm and the prox of t * norm."""
    name: str
    value: Callable[[np.ndarray], float]
    dual: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    separable: bool = False


L1_NORM = Norm(
    name='l1',
    value=lambda x: float(np.sum(np.abs(x))),
    dual=_max_abs,
    prox=soft_threshold,
    separable=True,
)

L2_NORM = Norm(
    name='l2',
    value=lambda x: float(np.linalg.norm(x)),
    dual=lambda w: float(np.linalg.norm(w)),
    prox=block_soft_threshold,
)

NORMS = {'l1': L1_NORM, 'l2': L2_NORM}


def get_norm(kind) -> Norm:
    if isinstance(kind, Norm):
        return kind
    try:
        return NORMS[kind]
    except KeyError:
        raise ValueError(f"unknown norm '{kind}', expected one of {sorted(NORMS)}") from None


class NormRegularizer(Regularizer):
    """g = lambda * ||.||, with g* the indicator of the dual-norm ball of radius lambda."""

    def __init__(self, lam: float, norm: Norm = L1_NORM):
        if lam <= 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        self.lam = float(lam)
        self.norm = norm
        self.name = norm.name
        self.separable = norm.separable

    @property
    def level(self) -> float:
        return self.lam

    @property
    def threshold(self) -> Optional[float]:
        return self.lam if self.separable else None

    def value(self, x: np.ndarray) -> ExtReal:
        return self.lam * self.norm.value(x)

    def conjugate(self, w: np.ndarray) -> ExtReal:
        return 0.0 if self.norm.dual(w) <= self.lam * (1.0 + FEASIBILITY_TOL) else INF

    def is_linked(self, x: np.ndarray, w: np.ndarray) -> bool:
        # d||x|| = {z : <z|x> = ||x||, ||z||_* <= 1}
        if self.norm.dual(w) > self.lam * (1.0 + FEASIBILITY_TOL):
            return False
        target = self.lam * self.norm.value(x)
        return abs(float(w @ x) - target) <= LINKAGE_TOL * (1.0 + target)

    def prox(self, v: np.ndarray, step: float) -> np.ndarray:
        return self.norm.prox(v, step * self.lam)

    def dual_scale_factor(self, w: np.ndarray) -> float:
        d = self.norm.dual(w)
        return 1.0 if d <= self.lam else self.lam / d

    def dual_norm(self, w: np.ndarray) -> float:
        return self.norm.dual(w)

    def scaled(self, factor: float) -> 'NormRegularizer':
        return NormRegularizer(factor * self.lam, self.norm)

    def local_model(self, x: np.ndarray) -> Optional[LocalModel]:
        if self.norm is L1_NORM:
            active = x != 0
            grad = self.lam * np.sign(x[active])
            k = grad.size
            return active, lambda xs: grad, lambda xs: np.zeros((k, k))
        if self.norm is L2_NORM:
            if not np.any(x):
                return None
            active = np.ones(x.size, dtype=bool)

            def grad(xs):
                return self.lam * xs / np.linalg.norm(xs)

            def hess(xs):
                r = np.linalg.norm(xs)
                d = xs / r
                return self.lam * (np.eye(xs.size) - np.outer(d, d)) / r

            return active, grad, hess
        return None

    def __repr__(self) -> str:
        return f"NormRegularizer(lam={self.lam:g}, norm='{self.norm.name}')"


class ElasticNet(Regularizer):
    """g = lambda1 ||x||_1 + (lambda2 / 2) ||x||^2; g* is finite everywhere."""

    name = 'elastic_net'
    separable = True

    def __init__(self, lam1: float, lam2: float):
        if lam1 <= 0 or lam2 <= 0:
            raise ValueError(f"lambda1 and lambda2 must be positive, got {lam1}, {lam2}")
        self.lam1 = float(lam1)
        self.lam2 = float(lam2)

    @property
    def level(self) -> float:
        return self.lam1

    @property
    def threshold(self) -> Optional[float]:
        return self.lam1

    def value(self, x: np.ndarray) -> ExtReal:
        return self.lam1 * float(np.sum(np.abs(x))) + 0.5 * self.lam2 * float(x @ x)

    def conjugate(self, w: np.ndarray) -> ExtReal:
        excess = np.maximum(np.abs(w) - self.lam1, 0.0)
        return float(excess @ excess) / (2.0 * self.lam2)

    def is_linked(self, x: np.ndarray, w: np.ndarray) -> bool:
        # w - lambda2 x must be a subgradient of lambda1 ||.||_1 at x
        r = w - self.lam2 * x
        nz = x != 0
        on_support = np.abs(r[nz] - self.lam1 * np.sign(x[nz])) <= LINKAGE_TOL * (1.0 + self.lam1)
        off_support = np.abs(r[~nz]) <= self.lam1 * (1.0 + FEASIBILITY_TOL)
        return bool(np.all(on_support) and np.all(off_support))

    def prox(self, v: np.ndarray, step: float) -> np.ndarray:
        return soft_threshold(v, step * self.lam1) / (1.0 + step * self.lam2)

    def dual_scale_factor(self, w: np.ndarray) -> float:
        return 1.0

    def dual_norm(self, w: np.ndarray) -> float:
        return _max_abs(w)

    def scaled(self, factor: float) -> 'ElasticNet':
        return ElasticNet(factor * self.lam1, factor * self.lam2)

    def local_model(self, x: np.ndarray) -> Optional[LocalModel]:
        active = x != 0
        signs = np.sign(x[active])
        k = signs.size
        return (active,
                lambda xs: self.lam1 * signs + self.lam2 * xs,
                lambda xs: self.lam2 * np.eye(k))

    def __repr__(self) -> str:
        return f"ElasticNet(lam1={self.lam1:g}, lam2={self.lam2:g})"


class NonNegativeL1(Regularizer):
    """g = lambda ||x||_1 + indicator(x >= 0); g* = indicator(max_j w_j <= lambda)."""

    name = 'nonneg_l1'
    separable = True

    def __init__(self, lam: float):
        if lam <= 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        self.lam = float(lam)

    @property
    def level(self) -> float:
        return self.lam

    @property
    def threshold(self) -> Optional[float]:
        return self.lam

    def value(self, x: np.ndarray) -> ExtReal:
        if np.any(x < 0):
            return INF
        return self.lam * float(np.sum(x))

    def conjugate(self, w: np.ndarray) -> ExtReal:
        return 0.0 if self.dual_norm(w) <= self.lam * (1.0 + FEASIBILITY_TOL) else INF

    def is_linked(self, x: np.ndarray, w: np.ndarray) -> bool:
        if np.any(x < 0) or self.dual_norm(w) > self.lam * (1.0 + FEASIBILITY_TOL):
            return False
        target = self.lam * float(np.sum(x))
        return abs(float(w @ x) - target) <= LINKAGE_TOL * (1.0 + target)

    def prox(self, v: np.ndarray, step: float) -> np.ndarray:
        return np.maximum(np.asarray(v, dtype=float) - step * self.lam, 0.0)

    def dual_scale_factor(self, w: np.ndarray) -> float:
        d = self.dual_norm(w)
        return 1.0 if d <= self.lam else self.lam / d

    def dual_norm(self, w: np.ndarray) -> float:
        return max(float(np.max(w)), 0.0) if w.size else 0.0

    def scaled(self, factor: float) -> 'NonNegativeL1':
        return NonNegativeL1(factor * self.lam)

    def local_model(self, x: np.ndarray) -> Optional[LocalModel]:
        active = x > 0
        k = int(np.count_nonzero(active))
        grad = np.full(k, self.lam)
        return active, lambda xs: grad, lambda xs: np.zeros((k, k))

    def __repr__(self) -> str:
        return f"NonNegativeL1(lam={self.lam:g})"
