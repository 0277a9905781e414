"""Problem model: min_x f(Ax) + g(x) and its dual max_u -f*(-u) - g*(A^T u)."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple, Union

import numpy as np

from models.errors import DimensionMismatch
from utils.ext_real import ExtReal
from utils.linalg import DesignMatrix, as_design_matrix, column_norms, drop_columns

# Active-set model of g around a point: (active mask, gradient, Hessian)
# of g restricted to the active coordinates, where g is smooth.
LocalModel = Tuple[np.ndarray, Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]


class SmoothPart(ABC):
    """Convex f: R^m -> R with a (1/alpha)-Lipschitz gradient."""

    name: str = 'smooth'

    def __init__(self, dimension: int, alpha: float):
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.dimension = int(dimension)
        self.alpha = float(alpha)

    @abstractmethod
    def value(self, z: np.ndarray) -> float:
        pass

    @abstractmethod
    def gradient(self, z: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def conjugate(self, v: np.ndarray) -> ExtReal:
        """f*(v), +inf outside dom(f*)."""
        pass

    @abstractmethod
    def curvature(self, z: np.ndarray) -> np.ndarray:
        """Diagonal of the Hessian of f at z."""
        pass

    def scaled(self, factor: float) -> 'SmoothPart':
        """The function factor * f."""
        from problems.smooth import ScaledSmooth
        return ScaledSmooth(self, factor)


class Regularizer(ABC):
    """Proper closed convex g: R^n -> R U {+inf}.

    `level` is the regularization strength lambda that sequential pairs
    rescale; `threshold` is the l1 screening level when g is separable
    with an l1 term, None otherwise.
    """

    name: str = 'regularizer'
    separable: bool = False

    @property
    @abstractmethod
    def level(self) -> float:
        pass

    @property
    def threshold(self) -> Optional[float]:
        return None

    @abstractmethod
    def value(self, x: np.ndarray) -> ExtReal:
        pass

    @abstractmethod
    def conjugate(self, w: np.ndarray) -> ExtReal:
        pass

    @abstractmethod
    def is_linked(self, x: np.ndarray, w: np.ndarray) -> bool:
        """Whether w lies in the subdifferential of g at x (up to tolerance)."""
        pass

    @abstractmethod
    def prox(self, v: np.ndarray, step: float) -> np.ndarray:
        """argmin_x step * g(x) + 0.5 * ||x - v||^2."""
        pass

    @abstractmethod
    def dual_scale_factor(self, w: np.ndarray) -> float:
        """Largest s in (0, 1] such that g*(s w) is finite."""
        pass

    @abstractmethod
    def dual_norm(self, w: np.ndarray) -> float:
        """Smallest level at which g*(w) would be finite (lambda_max helper)."""
        pass

    @abstractmethod
    def scaled(self, factor: float) -> 'Regularizer':
        """The function factor * g."""
        pass

    def with_level(self, level: float) -> 'Regularizer':
        return self.scaled(level / self.level)

    def local_model(self, x: np.ndarray) -> Optional[LocalModel]:
        """Smooth model of g on the active set of x, None when unavailable."""
        return None


@dataclass(frozen=True, eq=False)
class Problem:
    """Instance of min f(Ax) + g(x).

    A is stored column-major (dense Fortran or CSC). Instances are
    immutable and safe to share between threads.
    """

    A: DesignMatrix
    f: SmoothPart
    g: Regularizer
    name: str = 'problem'

    def __post_init__(self):
        A = as_design_matrix(self.A)
        if A.shape[0] == 0:
            raise ValueError("design matrix has no rows")
        object.__setattr__(self, 'A', A)
        if self.f.dimension != A.shape[0]:
            raise DimensionMismatch("smooth part", A.shape[0], self.f.dimension)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def alpha(self) -> float:
        return self.f.alpha

    @cached_property
    def column_norms(self) -> np.ndarray:
        return column_norms(self.A)

    def check_primal(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch("primal vector", self.n, x.size)
        return x

    def check_dual(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.m,):
            raise DimensionMismatch("dual vector", self.m, u.size)
        return u

    def rescaled(self, gamma: float) -> 'Problem':
        """min gamma^{-1} f(Ax) + g(x): same minimizers as f + gamma g."""
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        return Problem(self.A, self.f.scaled(1.0 / gamma), self.g, name=f"{self.name}/rescaled")

    def with_level(self, level: float) -> 'Problem':
        if level <= 0:
            raise ValueError(f"regularization level must be positive, got {level}")
        return Problem(self.A, self.f, self.g.with_level(level), name=self.name)

    def with_columns(self, keep: np.ndarray) -> 'Problem':
        return Problem(drop_columns(self.A, keep), self.f, self.g, name=self.name)


def _check_level(name: str, value: float):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def _check_matrix(A) -> Tuple[int, int]:
    shape = getattr(A, 'shape', None)
    if shape is None:
        A = np.asarray(A)
        shape = A.shape
    if len(shape) != 2 or shape[0] == 0 or shape[1] == 0:
        raise ValueError(f"design matrix must be non-empty 2-D, got shape {shape}")
    return shape


@dataclass
class LassoSpec:
    """Least squares 0.5||y - Ax||^2 with lambda * norm(x)."""
    A: DesignMatrix
    y: np.ndarray
    lam: float
    norm_kind: Union[str, object] = 'l1'

    def __post_init__(self):
        m, _ = _check_matrix(self.A)
        _check_level("lambda", self.lam)
        self.y = np.asarray(self.y, dtype=float)
        if self.y.shape != (m,):
            raise DimensionMismatch("response", m, self.y.size)


@dataclass
class LogisticL1Spec:
    """sum_i log(1 + exp(-(Ax)_i)) + lambda ||x||_1, labels already folded into A."""
    A: DesignMatrix
    lam: float

    def __post_init__(self):
        _check_matrix(self.A)
        _check_level("lambda", self.lam)


@dataclass
class ElasticNetSpec:
    """0.5||y - Ax||^2 + lambda1 ||x||_1 + (lambda2 / 2) ||x||^2."""
    A: DesignMatrix
    y: np.ndarray
    lam1: float
    lam2: float

    def __post_init__(self):
        m, _ = _check_matrix(self.A)
        _check_level("lambda1", self.lam1)
        _check_level("lambda2", self.lam2)
        self.y = np.asarray(self.y, dtype=float)
        if self.y.shape != (m,):
            raise DimensionMismatch("response", m, self.y.size)


@dataclass
class NonNegativeLassoSpec:
    """0.5||y - Ax||^2 + lambda ||x||_1 restricted to x >= 0."""
    A: DesignMatrix
    y: np.ndarray
    lam: float

    def __post_init__(self):
        m, _ = _check_matrix(self.A)
        _check_level("lambda", self.lam)
        self.y = np.asarray(self.y, dtype=float)
        if self.y.shape != (m,):
            raise DimensionMismatch("response", m, self.y.size)
