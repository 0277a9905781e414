"""Smooth data-fidelity terms f with closed-form gradients and conjugates."""
import numpy as np
from scipy.special import expit, xlogy

from models.problem import SmoothPart
from utils.ext_real import INF, ExtReal

# Dual points produced by solvers sit on the box boundary up to roundoff
LOGISTIC_BOX_TOL = 1e-12


class LeastSquares(SmoothPart):
    """f(z) = 0.5 ||y - z||^2, gradient 1-Lipschitz (alpha = 1)."""

    name = 'least_squares'

    def __init__(self, y: np.ndarray):
        self.y = np.asarray(y, dtype=float)
        super().__init__(self.y.size, alpha=1.0)

    def value(self, z: np.ndarray) -> float:
        r = self.y - z
        return 0.5 * float(r @ r)

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return z - self.y

    def conjugate(self, v: np.ndarray) -> ExtReal:
        return 0.5 * float(v @ v) + float(v @ self.y)

    def curvature(self, z: np.ndarray) -> np.ndarray:
        return np.ones_like(z)


class Logistic(SmoothPart):
    """f(z) = sum_i log(1 + exp(-z_i)), gradient 1/4-Lipschitz (alpha = 4).

    Labels are folded into the rows of A, so there is no label vector here.
    """

    name = 'logistic'

    def __init__(self, dimension: int):
        super().__init__(dimension, alpha=4.0)

    def value(self, z: np.ndarray) -> float:
        return float(np.sum(np.logaddexp(0.0, -z)))

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return -expit(-z)

    def conjugate(self, v: np.ndarray) -> ExtReal:
        # dom(f*) = [-1, 0]^m; with s = -v this is the binary entropy, 0 log 0 = 0
        s = -np.asarray(v, dtype=float)
        if np.any(s < -LOGISTIC_BOX_TOL) or np.any(s > 1.0 + LOGISTIC_BOX_TOL):
            return INF
        s = np.clip(s, 0.0, 1.0)
        return float(np.sum(xlogy(s, s) + xlogy(1.0 - s, 1.0 - s)))

    def curvature(self, z: np.ndarray) -> np.ndarray:
        p = expit(z)
        return p * (1.0 - p)


class ScaledSmooth(SmoothPart):
    """c * f for c > 0; the gradient constant scales to alpha / c."""

    def __init__(self, base: SmoothPart, factor: float):
        if factor <= 0:
            raise ValueError(f"scale factor must be positive, got {factor}")
        self.base = base
        self.factor = float(factor)
        self.name = f"{self.factor:g}*{base.name}"
        super().__init__(base.dimension, alpha=base.alpha / self.factor)

    def value(self, z: np.ndarray) -> float:
        return self.factor * self.base.value(z)

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return self.factor * self.base.gradient(z)

    def conjugate(self, v: np.ndarray) -> ExtReal:
        return self.factor * self.base.conjugate(np.asarray(v) / self.factor)

    def curvature(self, z: np.ndarray) -> np.ndarray:
        return self.factor * self.base.curvature(z)
