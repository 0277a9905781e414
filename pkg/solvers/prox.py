"""Proximity operators shared by the regularizers and the solver."""
import numpy as np


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """Prox of t * ||.||_1: sign(v) * max(|v| - t, 0)."""
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def block_soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """Prox of t * ||.||_2: shrink the whole vector toward 0."""
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= t:
        return np.zeros_like(v)
    return (1.0 - t / norm) * v
