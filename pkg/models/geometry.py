"""Value types passed between ball constructors, pairs and screening."""
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball B(c, r) = {u : ||u - c|| <= r} in the dual space."""
    center: np.ndarray
    radius: float
    tag: str = 'ball'

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        if not np.all(np.isfinite(center)):
            raise ValueError(f"{self.tag} ball center must be finite")
        radius = float(self.radius)
        if math.isnan(radius) or radius < 0 or math.isinf(radius):
            raise ValueError(f"{self.tag} ball radius must be finite and nonnegative, got {radius}")
        object.__setattr__(self, 'center', center)
        object.__setattr__(self, 'radius', radius)

    @property
    def dimension(self) -> int:
        return self.center.size

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tag': self.tag,
            'center': [float(c) for c in self.center],
            'radius': self.radius,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Ball':
        return cls(np.asarray(data['center'], dtype=float), data['radius'], data.get('tag', 'ball'))


@dataclass(frozen=True, eq=False)
class PrimalDualPair:
    """Primal x with dual u; gamma is set when the pair is sequential."""
    x: np.ndarray
    u: np.ndarray
    linked: bool = False
    gamma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'x', np.asarray(self.x, dtype=float).ravel())
        object.__setattr__(self, 'u', np.asarray(self.u, dtype=float).ravel())
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'x': [float(v) for v in self.x],
            'u': [float(v) for v in self.u],
            'linked': self.linked,
            'gamma': self.gamma,
        }


@dataclass(frozen=True, eq=False)
class ScreenMask:
    """flags[j] is True when x*_j = 0 is certified for every solution."""
    flags: np.ndarray
    ball_tag: str = 'ball'

    def __post_init__(self):
        object.__setattr__(self, 'flags', np.asarray(self.flags, dtype=bool).ravel())

    @property
    def n(self) -> int:
        return self.flags.size

    @property
    def screened_count(self) -> int:
        return int(np.count_nonzero(self.flags))

    @property
    def screened_indices(self) -> np.ndarray:
        return np.flatnonzero(self.flags)

    @property
    def kept_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.flags)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ball_tag': self.ball_tag,
            'screened_indices': [int(j) for j in self.screened_indices],
            'n': self.n,
        }
