#!/usr/bin/env python3
"""Safe Screen - Safe balls, screening and solver benchmarks from the command line.

Builds certified enclosures of the dual optimum for lasso-type and sparse
logistic problems, compares them, and measures dynamic screening.

Usage:
    python safe_screen.py gen --m 50 --n 100 --seed 3 --out data/inst.csv
    python safe_screen.py compare-balls data/inst.csv --lambda-fracs 0.3,0.5 --out report.json
    python safe_screen.py screen-run --family lasso --preset quick --format csv --out screen.csv
    python safe_screen.py solve data/inst.csv --lambda-frac 0.5 --screening ryu -v
"""
import argparse
import json
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Dict, List

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from balls.registry import BALLS
from duality.objectives import primal_dual_report
from harness.experiments import build_cell_problem, run_ball_comparison, run_dynamic_screening
from harness.loaders import generate_synthetic, load_instance, write_instance
from harness.report import emit_report, summary_rows
from models.experiment import EXPERIMENT_PRESETS, PAIR_STRATEGIES, ExperimentConfig, InstanceSource, SyntheticSpec
from models.solve import ScreeningConfig, SolveOptions
from problems.builders import PROBLEM_FAMILIES
from solvers.prox_grad import prox_grad_solve

console = Console()

CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}
INSTANCE_FIELDS = {'m', 'n', 'density', 'noise', 'count', 'normalize'}
INSTANCE_DEFAULTS = {'m': 30, 'n': 60, 'density': 0.1, 'noise': 0.1, 'count': 1, 'normalize': True}


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(',') if v.strip()]


def _str_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(',') if v.strip()]


def parse_args(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='Flat TOML file of key = value settings')
    common.add_argument('--seed', type=int, help='Seed for synthetic instances (default: 0)')
    common.add_argument('-o', '--out', type=Path, help='Output file')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress logs, -vv for solver iterations')

    instance = argparse.ArgumentParser(add_help=False)
    instance.add_argument('instances', nargs='*', type=Path,
                          help='LIBSVM or CSV files (default: synthetic instances)')
    instance.add_argument('--family', choices=list(PROBLEM_FAMILIES),
                          help='Problem family (default: lasso)')
    instance.add_argument('--m', type=int, help='Synthetic rows (default: 30)')
    instance.add_argument('--n', type=int, help='Synthetic columns (default: 60)')
    instance.add_argument('--density', type=float, help='Synthetic support density (default: 0.1)')
    instance.add_argument('--noise', type=float, help='Synthetic noise level (default: 0.1)')
    instance.add_argument('--count', type=int, help='Number of synthetic instances (default: 1)')
    instance.add_argument('--no-normalize', dest='normalize', action='store_false', default=None,
                          help='Keep raw column norms')

    parser = argparse.ArgumentParser(
        description='Safe screening toolkit: safe balls, screening and benchmarks',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  %(prog)s gen --m 50 --n 100 --out data/inst.libsvm --format libsvm
  %(prog)s compare-balls data/inst.csv --pairs zero,sequential
  %(prog)s compare-balls --family logistic --count 3 --format html --out report.html
  %(prog)s screen-run --tags gap,ryu --period 5 --format csv --out screen.csv
  %(prog)s solve --lambda-frac 0.3 --screening ryu --out result.json

Balls:
  ''' + '\n  '.join(f'{tag:<13} - {entry["description"]}' for tag, entry in BALLS.items()) + '''

Presets:
  quick, default, thorough (override any field with --config or flags)
        '''
    )
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', parents=[common], help='Write a synthetic instance')
    gen.add_argument('--m', type=int, default=30)
    gen.add_argument('--n', type=int, default=60)
    gen.add_argument('--density', type=float, default=0.1)
    gen.add_argument('--noise', type=float, default=0.1)
    gen.add_argument('--labels', action='store_true', help='Write +/-1 labels (logistic)')
    gen.add_argument('--format', choices=['csv', 'libsvm'], default='csv')

    solve = sub.add_parser('solve', parents=[common, instance], help='Solve one instance')
    solve.add_argument('--lambda-frac', type=float, default=0.5, help='lambda / lambda_max (default: 0.5)')
    solve.add_argument('--tol', type=float, default=1e-8, help='Duality gap tolerance (default: 1e-8)')
    solve.add_argument('--max-iters', type=int, default=20000)
    solve.add_argument('--screening', choices=list(BALLS), help='Dynamic screening ball')
    solve.add_argument('--period', type=int, default=10, help='Screening period in iterations')

    for name, help_text in (('compare-balls', 'Compare every applicable ball'),
                            ('screen-run', 'Dynamic screening with and without balls')):
        cmd = sub.add_parser(name, parents=[common, instance], help=help_text)
        cmd.add_argument('--preset', choices=list(EXPERIMENT_PRESETS), default='default')
        cmd.add_argument('--lambda-fracs', type=_float_list, help='Comma-separated lambda / lambda_max values')
        cmd.add_argument('--workers', type=int, help='Cells solved in parallel')
        cmd.add_argument('--format', choices=['json', 'csv', 'html'], default='json')
        cmd.add_argument('--no-timings', dest='record_timings', action='store_false', default=None,
                         help='Record zero timings (byte-identical reports)')
        if name == 'compare-balls':
            cmd.add_argument('--pairs', dest='pair_strategies', type=_str_list,
                             help='Pair strategies: ' + ', '.join(PAIR_STRATEGIES))
            cmd.add_argument('--balls', type=_str_list, help='Ball tags (default: all applicable)')
        else:
            cmd.add_argument('--tags', dest='screening_tags', type=_str_list,
                             help='Screening balls (default: gap,ryu)')
            cmd.add_argument('--period', dest='screening_period', type=int, help='Screening period')
            cmd.add_argument('--tol', dest='gap_tolerance', type=float, help='Duality gap tolerance')

    return parser.parse_args(argv)


def setup_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(message)s', datefmt='[%X]',
                        handlers=[RichHandler(console=Console(stderr=True), show_path=False)])


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read a flat TOML file; keys are ExperimentConfig fields or instance settings."""
    with path.open('rb') as fh:
        data = tomllib.load(fh)
    nested = [key for key, value in data.items() if isinstance(value, dict)]
    if nested:
        raise ValueError(f"{path}: config must be flat key = value pairs, got tables {nested}")
    unknown = sorted(set(data) - CONFIG_FIELDS - INSTANCE_FIELDS)
    if unknown:
        raise ValueError(f"{path}: unknown config keys {unknown}")
    return data


def resolve_settings(args) -> Dict[str, Any]:
    """Preset values, then the config file, then explicit flags."""
    settings: Dict[str, Any] = dict(INSTANCE_DEFAULTS)
    preset = getattr(args, 'preset', 'default')
    settings.update(asdict(EXPERIMENT_PRESETS[preset]))
    if args.config:
        settings.update(load_config_file(args.config))
    for key in CONFIG_FIELDS | INSTANCE_FIELDS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def build_experiment_config(settings: Dict[str, Any]) -> ExperimentConfig:
    return ExperimentConfig(**{key: value for key, value in settings.items() if key in CONFIG_FIELDS})


def load_instances(args, settings: Dict[str, Any]) -> list:
    if args.instances:
        return [load_instance(InstanceSource.from_path(path, normalize=settings['normalize']))
                for path in args.instances]
    labels = settings['family'] == 'logistic'
    return [
        load_instance(InstanceSource('synthetic', synthetic=SyntheticSpec(
            m=settings['m'], n=settings['n'], support_density=settings['density'],
            noise=settings['noise'], seed=settings['seed'] + k,
            normalize=settings['normalize'], labels=labels)))
        for k in range(settings['count'])
    ]


def print_checks(report, title: str):
    table = Table(title=title, show_header=True, header_style="bold cyan")
    table.add_column("Check")
    table.add_column("Passed", justify="right", style="green")
    table.add_column("Failed", justify="right", style="red")
    for row in summary_rows(report):
        table.add_row(row['check'], str(row['passed']), str(row['failed']))
    console.print(table)


def print_ball_summary(report):
    table = Table(title="Mean radius per ball", show_header=True, header_style="bold cyan")
    table.add_column("Ball")
    table.add_column("Records", justify="right")
    table.add_column("Mean radius", justify="right")
    table.add_column("Mean screened", justify="right")
    grouped: Dict[str, list] = {}
    for record in report.records:
        grouped.setdefault(record['ball'], []).append(record)
    for tag, rows in grouped.items():
        radii = [r['radius'] for r in rows if r['radius'] is not None]
        screened = [r['screened'] for r in rows if r['screened'] is not None]
        table.add_row(
            tag,
            str(len(rows)),
            f"{sum(radii) / len(radii):.4g}" if radii else "-",
            f"{sum(screened) / len(screened):.1f}" if screened else "-",
        )
    console.print(table)


def cmd_gen(args):
    if args.out is None:
        raise ValueError("gen needs --out")
    spec = SyntheticSpec(m=args.m, n=args.n, support_density=args.density, noise=args.noise,
                         seed=args.seed or 0, labels=args.labels)
    A, y = generate_synthetic(spec)
    write_instance(args.out, A, y, fmt=args.format)
    print(f"\n✅ Instance written: {args.out.absolute()} ({spec.m} x {spec.n}, {args.format})")


def cmd_solve(args):
    settings = resolve_settings(args)
    instances = load_instances(args, settings)
    instance = instances[0]
    p = build_cell_problem(instance, settings['family'], args.lambda_frac, settings['lam2_ratio'])
    if args.verbose:
        print(f"\n📊 {instance.name}: {p.m} x {p.n}, {settings['family']}, lambda = {p.g.level:.6g}")

    screening = ScreeningConfig(args.screening, args.period) if args.screening else None
    result = prox_grad_solve(p, SolveOptions(gap_tolerance=args.tol, max_iters=args.max_iters,
                                             screening=screening, raise_on_failure=False))
    status = "✅ Converged" if result.converged else "⚠️  Not converged"
    print(f"\n{status} in {result.iterations} iterations")
    print(f"   Gap:      {result.gap:.3e}")
    print(f"   Primal:   {result.primal:.12g}")
    print(f"   Nonzeros: {int((result.x != 0).sum())} / {p.n}")
    if screening is not None:
        print(f"   Screened: {result.screened_count} columns in {len(result.events)} events")

    if args.out:
        payload = {'instance': instance.name, 'lambda': p.g.level, 'result': result.to_dict(),
                   'objectives': primal_dual_report(p, result.x, result.u)}
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(payload, sort_keys=True, indent=2) + '\n')
        print(f"\n   📄 Result: {args.out.absolute()}")


def cmd_experiment(args, runner, title: str):
    settings = resolve_settings(args)
    config = build_experiment_config(settings)
    instances = load_instances(args, settings)
    if args.verbose:
        print(f"\n📊 {len(instances)} instance(s), family {config.family}, "
              f"lambda fractions {', '.join(f'{f:g}' for f in config.lambda_fracs)}")

    report = runner(instances, config)
    print_checks(report, title)
    if report.kind == 'ball_comparison':
        print_ball_summary(report)

    print(f"\n✅ {len(report.records)} records")
    if args.out:
        path = emit_report(report, args.format, args.out)
        print(f"   📄 Report: {path.absolute()}")


def main(argv=None):
    args = parse_args(argv)
    setup_logging(args.verbose)

    try:
        if args.command == 'gen':
            cmd_gen(args)
        elif args.command == 'solve':
            cmd_solve(args)
        elif args.command == 'compare-balls':
            cmd_experiment(args, run_ball_comparison, "Ball relations")
        else:
            cmd_experiment(args, run_dynamic_screening, "Dynamic screening")

    except KeyboardInterrupt:
        print("\n\nCancelled.")
        sys.exit(1)
    except Exception as e:
        print(f"\n❌ Error: {e}", file=sys.stderr)
        for note in getattr(e, '__notes__', []):
            print(f"   {note}", file=sys.stderr)
        if args.verbose:
            import traceback
            traceback.print_exc()
        sys.exit(1)


if __name__ == '__main__':
    main()
