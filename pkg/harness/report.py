"""Report emission: JSON, CSV and a static HTML page."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd
from jinja2 import Environment, FileSystemLoader, select_autoescape

from models.experiment import ExperimentReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('instance', 'lambda_frac', 'pair_strategy', 'ball', 'radius',
               'contains_ustar', 'screened', 'time_ms')

REPORT_FORMATS = ('json', 'csv', 'html')

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / 'templates'


def report_to_json(report: ExperimentReport) -> str:
    """Sorted keys, floats in repr form.

    repr is the shortest text that parses back to the same double (at most
    17 significant digits), so it is as exact as the CSV's %.17g and equal
    reports give equal text.
    """
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + '\n'


def report_frame(report: ExperimentReport) -> pd.DataFrame:
    """One row per record: the fixed columns first, extra keys after in sorted order."""
    extra = sorted({key for record in report.records for key in record} - set(CSV_COLUMNS))
    return pd.DataFrame(report.records, columns=list(CSV_COLUMNS) + extra)


def render_html(report: ExperimentReport) -> str:
    env = Environment(loader=FileSystemLoader(TEMPLATE_DIR), autoescape=select_autoescape(['html']))
    frame = report_frame(report)
    return env.get_template('report.html').render(
        report=report.to_dict(),
        columns=list(frame.columns),
        rows=_rows(frame),
    )


def _rows(frame: pd.DataFrame) -> List[List[Any]]:
    return [
        ['' if pd.isna(v) else (f'{v:.6g}' if isinstance(v, float) else v) for v in row]
        for row in frame.itertuples(index=False, name=None)
    ]


def emit_report(report: ExperimentReport, fmt: str, path: Union[str, Path]) -> Path:
    """Write the report as json, csv or html and return the path."""
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format '{fmt}', expected one of {REPORT_FORMATS}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if fmt == 'json':
        path.write_text(report_to_json(report))
    elif fmt == 'csv':
        report_frame(report).to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    else:
        path.write_text(render_html(report))

    logger.info("wrote %s report (%d records) to %s", fmt, len(report.records), path)
    return path


def summary_rows(report: ExperimentReport) -> List[Dict[str, Any]]:
    """Flattened check counts, for console tables."""
    checks = report.summary.get('checks', {})
    return [{'check': name, **counts} for name, counts in checks.items()]
