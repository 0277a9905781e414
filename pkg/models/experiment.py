"""Experiment configuration, instance sources and reports."""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

PAIR_STRATEGIES = {
    'zero': 'Dual scaling of x = 0',
    'iterate': 'Dual scaling of an early solver iterate',
    'sequential': 'Sequential pair from a larger regularization level',
}


@dataclass
class SyntheticSpec:
    """Seeded random instance: Gaussian design, sparse ground truth, noisy response."""
    m: int = 30                    # Rows (samples)
    n: int = 60                    # Columns (features)
    support_density: float = 0.1   # Fraction of nonzero true coefficients
    noise: float = 0.1             # Response noise standard deviation
    seed: int = 0
    normalize: bool = True         # Scale columns to unit norm
    labels: bool = False           # Binary labels sign(Ax + noise) instead of a response

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"dimensions must be positive, got m={self.m}, n={self.n}")
        if not 0.0 <= self.support_density <= 1.0:
            raise ValueError(f"support_density must be in [0, 1], got {self.support_density}")
        if self.noise < 0:
            raise ValueError(f"noise must be nonnegative, got {self.noise}")


@dataclass
class InstanceSource:
    """Where an instance comes from: a LIBSVM file, a CSV file or a synthetic spec."""
    kind: str                                # 'libsvm' | 'csv' | 'synthetic'
    path: Optional[Path] = None
    synthetic: Optional[SyntheticSpec] = None
    name: Optional[str] = None
    normalize: bool = False                  # Unit-norm columns after loading files
    n_features: Optional[int] = None         # LIBSVM width; inferred when None

    def __post_init__(self):
        if self.kind not in ('libsvm', 'csv', 'synthetic'):
            raise ValueError(f"unknown instance kind '{self.kind}'")
        if self.kind == 'synthetic':
            if self.synthetic is None:
                self.synthetic = SyntheticSpec()
        elif self.path is None:
            raise ValueError(f"{self.kind} source needs a path")
        else:
            self.path = Path(self.path)
        if self.name is None:
            if self.kind == 'synthetic':
                self.name = f"synthetic-{self.synthetic.m}x{self.synthetic.n}-s{self.synthetic.seed}"
            else:
                self.name = self.path.stem

    @classmethod
    def from_path(cls, path, normalize: bool = False, n_features: Optional[int] = None) -> 'InstanceSource':
        """CSV for a .csv suffix, LIBSVM otherwise."""
        path = Path(path)
        kind = 'csv' if path.suffix.lower() == '.csv' else 'libsvm'
        return cls(kind, path=path, normalize=normalize, n_features=n_features)


@dataclass
class ExperimentConfig:
    family: str = 'lasso'
    lambda_fracs: Tuple[float, ...] = (0.3, 0.5, 0.8)
    pair_strategies: Tuple[str, ...] = ('zero', 'iterate', 'sequential')
    balls: Optional[Tuple[str, ...]] = None     # None: every applicable ball
    sequential_ratio: float = 0.9               # lambda0 = min(lambda_max, lambda / ratio)
    iterate_iters: int = 20                     # Solver iterations behind the 'iterate' pair
    lam2_ratio: float = 1.0                     # Elastic net: lambda2 = ratio * lambda1
    reference_tolerance: float = 1e-12
    max_iters: int = 200000
    # Dynamic screening
    screening_tags: Tuple[str, ...] = ('gap', 'ryu')
    screening_period: int = 10
    gap_tolerance: float = 1e-8
    workers: int = 1
    record_timings: bool = True                 # False gives byte-identical reports across runs
    seed: int = 0

    def __post_init__(self):
        self.lambda_fracs = tuple(float(f) for f in self.lambda_fracs)
        self.pair_strategies = tuple(self.pair_strategies)
        self.screening_tags = tuple(self.screening_tags)
        if self.balls is not None:
            self.balls = tuple(self.balls)
        if not self.lambda_fracs or any(not 0.0 < f <= 1.0 for f in self.lambda_fracs):
            raise ValueError(f"lambda fractions must lie in (0, 1], got {self.lambda_fracs}")
        unknown = [s for s in self.pair_strategies if s not in PAIR_STRATEGIES]
        if unknown:
            raise ValueError(f"unknown pair strategies {unknown}, expected {sorted(PAIR_STRATEGIES)}")
        if not 0.0 < self.sequential_ratio <= 1.0:
            raise ValueError(f"sequential_ratio must lie in (0, 1], got {self.sequential_ratio}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.screening_period < 1:
            raise ValueError(f"screening_period must be >= 1, got {self.screening_period}")
        if not self.reference_tolerance > 0 or not self.gap_tolerance > 0:
            raise ValueError("tolerances must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# Preset experiment sizes
EXPERIMENT_PRESETS = {
    'quick': ExperimentConfig(lambda_fracs=(0.5,), pair_strategies=('zero', 'sequential'),
                              screening_period=20),
    'default': ExperimentConfig(),
    'thorough': ExperimentConfig(lambda_fracs=(0.1, 0.3, 0.5, 0.7, 0.9, 1.0),
                                 screening_period=5, gap_tolerance=1e-10),
}


@dataclass
class ExperimentReport:
    """Records of one experiment run.

    `records` holds one flat dict per (instance, lambda_frac,
    pair_strategy, ball) for ball comparisons, or per screening event for
    dynamic runs; `inclusion` maps a cell key to its is_subset matrix.
    """
    kind: str
    records: List[Dict[str, Any]] = field(default_factory=list)
    inclusion: Dict[str, Dict[str, Dict[str, bool]]] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'config': self.config,
            'summary': self.summary,
            'records': self.records,
            'inclusion': self.inclusion,
        }
