"""Experiment orchestration: ball comparisons and dynamic-screening runs.

Each (instance, lambda fraction) cell is independent and may run in a
thread pool; records are sorted before they reach the report so the
output does not depend on scheduling.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from balls.constructors import ryu_ball, t_star
from balls.geometry import contains, is_subset
from balls.registry import BALLS, build_ball, is_applicable
from duality.objectives import primal_dual_report
from harness.loaders import Instance, fold_labels
from models.errors import SafetyViolation, ScreeningError
from models.experiment import ExperimentConfig, ExperimentReport
from models.geometry import Ball, PrimalDualPair
from models.problem import Problem
from models.solve import ScreeningConfig, SolveOptions, SolveResult
from problems.builders import lambda_max, problem_at_fraction
from screening.pairs import dual_scaling, sequential_pair
from screening.rules import screen_l1
from solvers.prox_grad import prox_grad_solve

logger = logging.getLogger(__name__)

RECORD_ORDER = ('instance', 'lambda_frac', 'pair_strategy', 'ball')

# Slack used when comparing quantities the theory says are equal
EQUALITY_TOL = 1e-10


def build_cell_problem(instance: Instance, family: str, fraction: float, lam2_ratio: float = 1.0) -> Problem:
    """Problem of the given family on an instance at lambda = fraction * lambda_max."""
    if family == 'logistic':
        p = problem_at_fraction(family, fold_labels(instance.A, instance.y), None, fraction)
    else:
        p = problem_at_fraction(family, instance.A, instance.y, fraction, lam2_ratio=lam2_ratio)
    return Problem(p.A, p.f, p.g, name=instance.name)


def reference_solution(p: Problem, config: ExperimentConfig) -> SolveResult:
    return prox_grad_solve(p, SolveOptions(gap_tolerance=config.reference_tolerance,
                                           max_iters=config.max_iters))


def reference_radius(p: Problem, result: SolveResult) -> float:
    """Bound on ||u_ref - u*|| from the reference gap (dual strong concavity)."""
    return math.sqrt(2.0 * result.gap / p.alpha)


def build_pair(p: Problem, strategy: str, config: ExperimentConfig) -> PrimalDualPair:
    if strategy == 'zero':
        return dual_scaling(p, np.zeros(p.n))
    if strategy == 'iterate':
        early = prox_grad_solve(p, SolveOptions(max_iters=config.iterate_iters,
                                                gap_tolerance=config.reference_tolerance,
                                                polish=False, raise_on_failure=False))
        return dual_scaling(p, early.x)
    if strategy == 'sequential':
        lam = p.g.level
        lam0 = max(lam, min(lambda_max(p), lam / config.sequential_ratio))
        return sequential_pair(p, lam0, tol=config.reference_tolerance,
                               options=SolveOptions(max_iters=config.max_iters))
    raise ValueError(f"unknown pair strategy '{strategy}'")


def _timed(fn: Callable, *args) -> Tuple[Any, float]:
    start = time.perf_counter()
    value = fn(*args)
    return value, 1000.0 * (time.perf_counter() - start)


def _check_safe(p: Problem, pair: PrimalDualPair, ball: Ball, u_ref: np.ndarray, slack: float, cell: str):
    if contains(Ball(ball.center, ball.radius + slack, ball.tag), u_ref):
        return
    diagnostics = {
        'cell': cell,
        'pair': pair.to_dict(),
        'ball': ball.to_dict(),
        'distance': float(np.linalg.norm(u_ref - ball.center)),
        'reference_slack': slack,
        'objectives': primal_dual_report(p, pair.x, pair.u),
    }
    raise SafetyViolation(f"{ball.tag} ball misses the dual optimum in cell {cell}", diagnostics)


def _tally(checks: Dict[str, Dict[str, int]], name: str, ok: bool):
    entry = checks.setdefault(name, {'passed': 0, 'failed': 0})
    entry['passed' if ok else 'failed'] += 1
    if not ok:
        logger.warning("check '%s' failed", name)


def _relation_checks(p: Problem, pair: PrimalDualPair, balls: Dict[str, Ball], checks: Dict):
    """Inclusions and equalities between balls built from one pair."""
    if 'ryu' in balls and 'gap' in balls:
        ryu, gap = balls['ryu'], balls['gap']
        _tally(checks, 'half_squared_radius', ryu.radius ** 2 <= 0.5 * gap.radius ** 2 + 1e-12)
        _tally(checks, 'ryu_in_gap', is_subset(ryu, gap))
    if 'ryu' in balls and 'xgap' in balls:
        _tally(checks, 'ryu_in_xgap', is_subset(balls['ryu'], balls['xgap']))
    if 'dynamic_edpp' in balls:
        ref = ryu_ball(p, t_star(p, pair.x, pair.u) * pair.x, pair.u)
        _tally(checks, 'dynamic_edpp_equals_ryu', _same_ball(balls['dynamic_edpp'], ref))
    for tag in ('fne', 'edpp', 'sfer'):
        if tag in balls and 'ryu' in balls:
            _tally(checks, f'{tag}_equals_ryu', _same_ball(balls[tag], balls['ryu']))
    if 'sasvi' in balls or 'safe' in balls:
        at_zero = ryu_ball(p, np.zeros(p.n), pair.u)
        if 'sasvi' in balls:
            _tally(checks, 'sasvi_equals_ryu_at_zero', _same_ball(balls['sasvi'], at_zero))
        if 'safe' in balls:
            _tally(checks, 'ryu_at_zero_in_safe', is_subset(at_zero, balls['safe']))
    if 'sfer' in balls and 'slores' in balls:
        _tally(checks, 'sfer_in_slores', is_subset(balls['sfer'], balls['slores']))


def _same_ball(a: Ball, b: Ball) -> bool:
    centers = np.max(np.abs(a.center - b.center), initial=0.0) <= EQUALITY_TOL
    radii = abs(a.radius - b.radius) <= EQUALITY_TOL * max(1.0, b.radius)
    return bool(centers and radii)


def _compare_cell(instance: Instance, fraction: float, config: ExperimentConfig):
    p = build_cell_problem(instance, config.family, fraction, config.lam2_ratio)
    reference = reference_solution(p, config)
    slack = reference_radius(p, reference)
    records, inclusion, checks = [], {}, {}

    for strategy in config.pair_strategies:
        cell = f"{instance.name}|{fraction:g}|{strategy}"
        try:
            pair = build_pair(p, strategy, config)
            balls = {}
            for tag in config.balls or tuple(BALLS):
                if not is_applicable(tag, p, pair):
                    continue
                ball, elapsed = _timed(build_ball, tag, p, pair)
                _check_safe(p, pair, ball, reference.u, slack, cell)
                balls[tag] = ball
                screened = screen_l1(p, ball).screened_count if p.g.threshold is not None else None
                records.append({
                    'instance': instance.name,
                    'lambda_frac': fraction,
                    'pair_strategy': strategy,
                    'ball': tag,
                    'radius': ball.radius,
                    'contains_ustar': True,
                    'screened': screened,
                    'time_ms': elapsed if config.record_timings else 0.0,
                    'center_norm': float(np.linalg.norm(ball.center)),
                    'lambda': p.g.level,
                    'gamma': pair.gamma,
                })
            _relation_checks(p, pair, balls, checks)
            inclusion[cell] = {
                a: {b: is_subset(balls[a], balls[b]) for b in balls}
                for a in balls
            }
            if 'ryu' in balls and 'gap' in balls and balls['gap'].radius > 1e-3:
                _tally(checks, 'ryu_proper_subset_of_gap', balls['gap'].radius - balls['ryu'].radius > 1e-8)
        except ScreeningError as e:
            e.add_note(f"in cell {cell}")
            raise
    return records, inclusion, checks


def _merge_checks(total: Dict, part: Dict):
    for name, counts in part.items():
        entry = total.setdefault(name, {'passed': 0, 'failed': 0})
        entry['passed'] += counts['passed']
        entry['failed'] += counts['failed']


def _run_cells(instances: Sequence[Instance], config: ExperimentConfig, cell_fn: Callable) -> List:
    cells = [(inst, frac) for inst in instances for frac in config.lambda_fracs]
    if config.workers == 1:
        return [cell_fn(inst, frac, config) for inst, frac in cells]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda cell: cell_fn(cell[0], cell[1], config), cells))


def _sort_key(record: Dict[str, Any]):
    return tuple(record[key] for key in RECORD_ORDER) + (record.get('iteration', 0),)


def run_ball_comparison(instances: Sequence[Instance], config: ExperimentConfig) -> ExperimentReport:
    """Build every applicable ball for every (instance, lambda, pair) cell.

    Every ball is checked against the reference dual optimum; a miss
    aborts the run with SafetyViolation instead of producing a row.
    """
    report = ExperimentReport('ball_comparison', config=config.to_dict())
    checks: Dict[str, Dict[str, int]] = {}
    for records, inclusion, cell_checks in _run_cells(instances, config, _compare_cell):
        report.records.extend(records)
        report.inclusion.update(inclusion)
        _merge_checks(checks, cell_checks)
    report.records.sort(key=_sort_key)
    report.inclusion = dict(sorted(report.inclusion.items()))
    report.summary = {
        'cells': len(report.inclusion),
        'records': len(report.records),
        'checks': dict(sorted(checks.items())),
    }
    logger.info("ball comparison: %d records over %d cells", len(report.records), len(report.inclusion))
    return report


def _count_screened(p: Problem, tag: str, pair: PrimalDualPair) -> int:
    return screen_l1(p, build_ball(tag, p, pair)).screened_count


def _screening_cell(instance: Instance, fraction: float, config: ExperimentConfig):
    p = build_cell_problem(instance, config.family, fraction, config.lam2_ratio)
    reference = reference_solution(p, config)
    slack = reference_radius(p, reference)
    records, checks = [], {}
    base = {'instance': instance.name, 'lambda_frac': fraction, 'pair_strategy': 'dynamic'}

    def timing(ms):
        return ms if config.record_timings else 0.0

    off_opts = SolveOptions(gap_tolerance=config.gap_tolerance, max_iters=config.max_iters)
    off, off_ms = _timed(prox_grad_solve, p, off_opts)
    records.append({**base, 'ball': 'none', 'iteration': off.iterations, 'radius': None,
                    'contains_ustar': None, 'screened': 0, 'screened_fraction': 0.0,
                    'time_ms': timing(off_ms), 'primal': off.primal})

    zero_set = np.abs(reference.x) <= 1e-9
    for tag in config.screening_tags:
        cell = f"{instance.name}|{fraction:g}|dynamic-{tag}"
        try:
            opts = SolveOptions(gap_tolerance=config.gap_tolerance, max_iters=config.max_iters,
                                screening=ScreeningConfig(tag, config.screening_period))
            on, on_ms = _timed(prox_grad_solve, p, opts)

            _tally(checks, 'objective_agreement', abs(on.primal - off.primal) <= 2.0 * config.gap_tolerance)
            screened_final = np.setdiff1d(np.arange(p.n), on.kept)
            _tally(checks, 'final_screened_are_zero', bool(np.all(zero_set[screened_final])))
            _tally(checks, 'counts_nondecreasing', all(
                a <= b for a, b in zip(on.screened_counts, on.screened_counts[1:])))

            for event in on.events:
                sub = p.with_columns(event.kept)
                pair = PrimalDualPair(event.x, event.u)
                ball = build_ball(tag, sub, pair)
                _check_safe(sub, pair, ball, reference.u, slack, f"{cell}@{event.iteration}")
                already = p.n - event.kept.size
                gap_count = already + _count_screened(sub, 'gap', pair)
                ryu_count = already + _count_screened(sub, 'ryu', pair)
                _tally(checks, 'ryu_screens_at_least_gap', ryu_count >= gap_count)
                records.append({
                    **base,
                    'ball': tag,
                    'iteration': event.iteration,
                    'radius': event.radius,
                    'contains_ustar': True,
                    'screened': event.screened_count,
                    'screened_fraction': event.screened_count / p.n,
                    'time_ms': timing(on_ms),
                    'gap_screened': gap_count,
                    'ryu_screened': ryu_count,
                    'primal': on.primal,
                    'speedup': (off_ms / on_ms if on_ms > 0 else None) if config.record_timings else None,
                })
        except ScreeningError as e:
            e.add_note(f"in cell {cell}")
            raise
    return records, {}, checks


def run_dynamic_screening(instances: Sequence[Instance], config: ExperimentConfig) -> ExperimentReport:
    """Solve every cell with and without dynamic screening and trace the screened fraction.

    At each screening event the GAP and RYU balls are rebuilt from the
    stored pair so both are compared on exactly the same iterate.
    """
    report = ExperimentReport('dynamic_screening', config=config.to_dict())
    checks: Dict[str, Dict[str, int]] = {}
    for records, _, cell_checks in _run_cells(instances, config, _screening_cell):
        report.records.extend(records)
        _merge_checks(checks, cell_checks)
    report.records.sort(key=_sort_key)
    report.summary = {
        'records': len(report.records),
        'checks': dict(sorted(checks.items())),
    }
    return report
