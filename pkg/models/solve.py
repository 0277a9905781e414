"""Solver options and results."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


@dataclass
class ScreeningConfig:
    """Dynamic screening: build a `tag` ball every `period` iterations."""
    tag: str = 'ryu'
    period: int = 10

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"screening period must be >= 1, got {self.period}")


@dataclass
class SolveOptions:
    max_iters: int = 20000
    gap_tolerance: float = 1e-8
    step: Optional[float] = None           # None: 1 / L from power iteration
    backtracking: bool = True
    screening: Optional[ScreeningConfig] = None
    polish: bool = True
    x0: Optional[np.ndarray] = None
    raise_on_failure: bool = True

    def __post_init__(self):
        if not self.gap_tolerance > 0:
            raise ValueError(f"gap_tolerance must be positive, got {self.gap_tolerance}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")
        if self.step is not None and not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")


@dataclass
class ScreeningEvent:
    """One dynamic screening pass.

    `kept` indexes the full problem's columns alive when the ball was
    built; `x` (on those columns) and `u` are the pair it was built from,
    so the ball can be rebuilt on p.with_columns(kept). `screened_count`
    is the running total after the pass.
    """
    iteration: int
    ball_tag: str
    screened_count: int
    newly_screened: int
    radius: float
    kept: np.ndarray
    x: np.ndarray
    u: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iteration': self.iteration,
            'ball_tag': self.ball_tag,
            'screened_count': self.screened_count,
            'newly_screened': self.newly_screened,
            'radius': self.radius,
            'kept': [int(j) for j in self.kept],
        }


@dataclass
class SolveResult:
    x: np.ndarray
    u: np.ndarray
    gap: float
    primal: float
    iterations: int
    converged: bool
    step: float
    gap_trace: List[float] = field(default_factory=list)
    events: List[ScreeningEvent] = field(default_factory=list)
    kept: Optional[np.ndarray] = None    # Columns alive at the end; None without screening

    @property
    def screened_counts(self) -> List[int]:
        return [event.screened_count for event in self.events]

    @property
    def screened_count(self) -> int:
        return self.events[-1].screened_count if self.events else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'x': [float(v) for v in self.x],
            'u': [float(v) for v in self.u],
            'gap': self.gap,
            'primal': self.primal,
            'iterations': self.iterations,
            'converged': self.converged,
            'step': self.step,
            'gap_trace': [float(g) for g in self.gap_trace],
            'screened_counts': self.screened_counts,
            'events': [event.to_dict() for event in self.events],
            'kept': None if self.kept is None else [int(j) for j in self.kept],
        }
