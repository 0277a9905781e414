"""Accelerated proximal gradient (monotone FISTA) with optional dynamic screening."""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from balls.registry import build_ball, is_applicable, pair_requirement, supports_family
from duality.objectives import duality_gap, primal_objective
from models.errors import SolverFailed, WrongFamily
from models.geometry import PrimalDualPair
from models.problem import Problem
from models.solve import ScreeningConfig, ScreeningEvent, SolveOptions, SolveResult
from screening.pairs import dual_scaling
from screening.rules import screen_l1
from solvers.prox import soft_threshold
from utils.linalg import drop_columns, spectral_norm_sq, to_dense

logger = logging.getLogger(__name__)

__all__ = ['estimate_step', 'polish_support', 'prox_grad_solve', 'soft_threshold']

# Try a Newton polish on the active set every POLISH_PERIOD iterations
POLISH_PERIOD = 25
NEWTON_STEPS = 20

MIN_STEP = 1e-20


def estimate_step(p: Problem) -> float:
    """1 / L with L = sigma_max(A)^2 / alpha from power iteration.

    The power estimate is a lower bound on sigma_max^2, so the solver
    backtracks from this step when the descent condition fails.
    """
    lipschitz = spectral_norm_sq(p.A) / p.alpha
    if lipschitz <= 0.0:
        return 1.0
    return 1.0 / lipschitz


def _image(p: Problem, x: np.ndarray) -> np.ndarray:
    return np.asarray(p.A @ x).ravel()


def _gap_at(p: Problem, x: np.ndarray) -> Tuple[np.ndarray, float]:
    u = dual_scaling(p, x).u
    return u, duality_gap(p, x, u)


def _newton_on_support(p: Problem, x: np.ndarray) -> Optional[np.ndarray]:
    model = p.g.local_model(x)
    if model is None:
        return None
    active, g_grad, g_hess = model
    if not np.any(active):
        return None

    A_S = to_dense(drop_columns(p.A, np.flatnonzero(active)))
    signs = np.sign(x[active])
    xs = x[active].copy()
    for _ in range(NEWTON_STEPS):
        z = A_S @ xs
        grad = A_S.T @ p.f.gradient(z) + g_grad(xs)
        hess = A_S.T @ (p.f.curvature(z)[:, None] * A_S) + g_hess(xs)
        delta = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        xs = xs + delta
        if not np.all(np.isfinite(xs)) or not np.any(xs):
            return None
        # the model is only valid while the sign pattern holds
        if p.g.separable and not np.array_equal(np.sign(xs), signs):
            return None
        if np.linalg.norm(delta) <= 1e-15 * (1.0 + np.linalg.norm(xs)):
            break

    polished = np.zeros_like(x)
    polished[active] = xs
    return polished


def _try_polish(p: Problem, x: np.ndarray) -> Optional[np.ndarray]:
    candidate = _newton_on_support(p, x)
    if candidate is None:
        return None
    _, before = _gap_at(p, x)
    _, after = _gap_at(p, candidate)
    if after > before:
        return None
    logger.debug("support polish: gap %.3e -> %.3e", before, after)
    return candidate


def polish_support(p: Problem, x: np.ndarray) -> np.ndarray:
    """Newton refinement of x on its active set, where g is smooth.

    The refined point is returned only if it keeps the active pattern and
    does not increase the duality gap; otherwise x comes back unchanged.
    """
    x = p.check_primal(x)
    polished = _try_polish(p, x)
    return x if polished is None else polished


def _prox_step(p: Problem, y: np.ndarray, step: float, backtracking: bool) -> Tuple[np.ndarray, float]:
    zy = _image(p, y)
    fy = p.f.value(zy)
    grad = np.asarray(p.A.T @ p.f.gradient(zy)).ravel()
    while True:
        x_new = p.g.prox(y - step * grad, step)
        if not backtracking:
            return x_new, step
        d = x_new - y
        upper = fy + float(grad @ d) + float(d @ d) / (2.0 * step)
        if p.f.value(_image(p, x_new)) <= upper + 1e-12 * (1.0 + abs(fy)):
            return x_new, step
        step *= 0.5
        if step < MIN_STEP:
            raise SolverFailed("step size underflow during backtracking")


def _check_screening(p: Problem, config: ScreeningConfig):
    if p.g.threshold is None:
        raise WrongFamily(f"dynamic screening needs a separable l1-type regularizer, got {p.g.name}")
    if pair_requirement(config.tag) == 'sequential':
        raise ValueError(f"{config.tag} ball needs a sequential pair, which dynamic screening never builds")
    if not supports_family(config.tag, p):
        raise WrongFamily(f"{config.tag} ball does not apply to f = {p.f.name}, g = {p.g.name}")


def _inflate(x: np.ndarray, kept: np.ndarray, n: int) -> np.ndarray:
    full = np.zeros(n)
    full[kept] = x
    return full


def prox_grad_solve(p: Problem, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Solve min f(Ax) + g(x) to a certified duality gap.

    The dual point at every iterate is the dual scaling of -grad f(Ax);
    the result carries the best pair seen. With dynamic screening on,
    every `period` iterations a ball is built on the current reduced
    problem and certified columns are dropped for good.

    Raises:
        SolverFailed: the gap tolerance was not reached within max_iters
            (only when opts.raise_on_failure; the partial result is attached).
    """
    opts = opts or SolveOptions()
    tol = opts.gap_tolerance
    n = p.n
    x = np.zeros(n) if opts.x0 is None else p.check_primal(opts.x0).copy()
    screening = opts.screening
    if screening is not None:
        _check_screening(p, screening)

    step = opts.step if opts.step is not None else estimate_step(p)
    logger.info("solving %s (m=%d, n=%d), step %.3e, tolerance %.1e",
                p.name, p.m, n, step, tol)

    work = p
    kept = np.arange(n)
    events = []

    u, gap = _gap_at(work, x)
    best_x, best_u, best_gap = x.copy(), u, gap
    trace = [gap]
    converged = gap <= tol
    iterations = 0

    y = x.copy()
    t = 1.0
    px = primal_objective(work, x)

    while not converged and iterations < opts.max_iters and n > 0:
        iterations += 1
        it = iterations

        z, step = _prox_step(work, y, step, opts.backtracking)
        pz = primal_objective(work, z)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if pz <= px:
            y = z + ((t - 1.0) / t_next) * (z - x)
            x, px = z, pz
            t = t_next
        else:
            # monotone restart: keep x, drop the momentum
            y = x.copy()
            t = 1.0

        u, gap = _gap_at(work, x)

        if opts.polish and work.n > 0 and (it % POLISH_PERIOD == 0 or gap <= tol):
            polished = _try_polish(work, x)
            if polished is not None:
                x = polished
                px = primal_objective(work, x)
                u, gap = _gap_at(work, x)
                y = x.copy()
                t = 1.0

        if gap < best_gap:
            best_x, best_u, best_gap = _inflate(x, kept, n), u, gap
        trace.append(best_gap)

        if it % 100 == 0:
            logger.debug("iter %d: gap %.3e, step %.3e, %d columns", it, gap, step, work.n)

        if gap <= tol:
            if work is p:
                converged = True
                break
            full_x = _inflate(x, kept, n)
            full_u, full_gap = _gap_at(p, full_x)
            if full_gap <= tol:
                best_x, best_u, best_gap = full_x, full_u, full_gap
                converged = True
                break
            logger.debug("iter %d: reduced gap %.3e but full gap %.3e, continuing", it, gap, full_gap)

        if screening is not None and it % screening.period == 0:
            pair = PrimalDualPair(x, u)
            if not is_applicable(screening.tag, work, pair):
                logger.debug("iter %d: %s ball not applicable, skipping screening", it, screening.tag)
                continue
            ball = build_ball(screening.tag, work, pair)
            mask = screen_l1(work, ball)
            newly = mask.screened_count
            events.append(ScreeningEvent(
                iteration=it,
                ball_tag=screening.tag,
                screened_count=n - kept.size + newly,
                newly_screened=newly,
                radius=ball.radius,
                kept=kept.copy(),
                x=x.copy(),
                u=u.copy(),
            ))
            if newly:
                keep_local = mask.kept_indices
                kept = kept[keep_local]
                work = work.with_columns(keep_local)
                x = x[keep_local]
                y = x.copy()
                t = 1.0
                px = primal_objective(work, x)
                logger.info("iter %d: %s ball screened %d columns, %d remain",
                            it, screening.tag, newly, kept.size)
                if kept.size == 0:
                    full_x = np.zeros(n)
                    best_u, best_gap = _gap_at(p, full_x)
                    best_x = full_x
                    converged = best_gap <= tol
                    break

    # the reported pair is always evaluated on the full problem
    if work is not p and not converged:
        best_u, best_gap = _gap_at(p, best_x)
        converged = best_gap <= tol

    result = SolveResult(
        x=best_x,
        u=best_u,
        gap=best_gap,
        primal=primal_objective(p, best_x),
        iterations=iterations,
        converged=converged,
        step=step,
        gap_trace=trace,
        events=events,
        kept=kept if screening is not None else None,
    )
    if converged:
        logger.info("converged in %d iterations, gap %.3e", iterations, best_gap)
    else:
        message = f"gap {best_gap:.3e} above tolerance {tol:.1e} after {iterations} iterations"
        if opts.raise_on_failure:
            raise SolverFailed(message, result=result)
        logger.warning(message)
    return result
