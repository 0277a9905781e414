#!/usr/bin/env python3
"""Safe Screen - Web service for ball comparisons and screened solves."""
import asyncio
import hashlib
import logging
import tempfile
from collections import OrderedDict
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse
from fastapi.templating import Jinja2Templates
from pydantic import BaseModel

from balls.registry import describe_balls
from duality.objectives import primal_dual_report
from harness.experiments import build_cell_problem, run_ball_comparison
from harness.loaders import load_instance
from harness.report import render_html, report_frame
from models.errors import ScreeningError
from models.experiment import EXPERIMENT_PRESETS, PAIR_STRATEGIES, InstanceSource, SyntheticSpec
from models.solve import ScreeningConfig, SolveOptions
from problems.builders import PROBLEM_FAMILIES
from solvers.prox_grad import prox_grad_solve

logger = logging.getLogger(__name__)

app = FastAPI(title="Safe Screen")

# Small LRU cache of finished runs (max 50 items)
_result_cache: OrderedDict[str, Any] = OrderedDict()
_CACHE_MAX_SIZE = 50


def _cache_key(*args) -> str:
    """Generate cache key from arguments."""
    return hashlib.md5(str(args).encode()).hexdigest()


def _get_cached(key: str) -> Optional[Any]:
    """Get item from cache, move to end (LRU)."""
    if key in _result_cache:
        _result_cache.move_to_end(key)
        return _result_cache[key]
    return None


def _set_cached(key: str, value: Any):
    """Set item in cache, evict oldest if full."""
    _result_cache[key] = value
    _result_cache.move_to_end(key)
    while len(_result_cache) > _CACHE_MAX_SIZE:
        _result_cache.popitem(last=False)


BASE_DIR = Path(__file__).parent
templates = Jinja2Templates(directory=BASE_DIR / "templates")


class InstanceRequest(BaseModel):
    family: str = 'lasso'
    m: int = 30
    n: int = 60
    seed: int = 0
    support_density: float = 0.1
    noise: float = 0.1


class CompareRequest(InstanceRequest):
    preset: str = 'quick'
    lambda_fracs: Optional[List[float]] = None
    pair_strategies: Optional[List[str]] = None
    balls: Optional[List[str]] = None
    format: str = 'json'


class SolveRequest(InstanceRequest):
    lambda_frac: float = 0.5
    gap_tolerance: float = 1e-8
    max_iters: int = 20000
    screening: Optional[str] = None
    period: int = 10


def _error(e: Exception) -> JSONResponse:
    return JSONResponse(status_code=400, content={"success": False, "error": str(e)})


def _synthetic_source(req: InstanceRequest) -> InstanceSource:
    spec = SyntheticSpec(m=req.m, n=req.n, support_density=req.support_density, noise=req.noise,
                         seed=req.seed, labels=req.family == 'logistic')
    return InstanceSource('synthetic', synthetic=spec)


def _experiment_config(preset: str, family: str, lambda_fracs=None, pair_strategies=None, balls=None):
    if preset not in EXPERIMENT_PRESETS:
        raise ValueError(f"unknown preset '{preset}', expected one of {sorted(EXPERIMENT_PRESETS)}")
    overrides: Dict[str, Any] = {'family': family, 'record_timings': False}
    if lambda_fracs:
        overrides['lambda_fracs'] = tuple(lambda_fracs)
    if pair_strategies:
        overrides['pair_strategies'] = tuple(pair_strategies)
    if balls:
        overrides['balls'] = tuple(balls)
    return replace(EXPERIMENT_PRESETS[preset], **overrides)


def _render(report, fmt: str):
    if fmt == 'csv':
        return PlainTextResponse(report_frame(report).to_csv(index=False, float_format='%.17g'),
                                 media_type='text/csv')
    if fmt == 'html':
        return HTMLResponse(render_html(report))
    return {"success": True, **report.to_dict()}


@app.get("/", response_class=HTMLResponse)
async def index(request: Request):
    """Serve main page."""
    return templates.TemplateResponse(request, "index.html", {
        "balls": describe_balls(),
        "families": PROBLEM_FAMILIES,
        "presets": sorted(EXPERIMENT_PRESETS),
        "strategies": PAIR_STRATEGIES,
    })


@app.get("/balls")
async def get_balls():
    """Return the registered ball constructors."""
    return describe_balls()


@app.get("/families")
async def get_families():
    """Return the shipped problem families."""
    return PROBLEM_FAMILIES


@app.post("/compare")
async def compare(req: CompareRequest):
    """Compare every applicable ball on a synthetic instance."""
    key = _cache_key("compare", req.model_dump_json())
    report = _get_cached(key)
    try:
        if report is None:
            config = _experiment_config(req.preset, req.family, req.lambda_fracs,
                                        req.pair_strategies, req.balls)
            instance = load_instance(_synthetic_source(req))
            report = await asyncio.to_thread(run_ball_comparison, [instance], config)
            _set_cached(key, report)
        return _render(report, req.format)
    except (ScreeningError, ValueError) as e:
        return _error(e)


def _compare_upload_sync(data: bytes, filename: str, family: str, preset: str, lambda_fracs, normalize: bool):
    suffix = Path(filename or 'upload.libsvm').suffix or '.libsvm'
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / f"{Path(filename or 'upload').stem}{suffix}"
        path.write_bytes(data)
        instance = load_instance(InstanceSource.from_path(path, normalize=normalize))
    config = _experiment_config(preset, family, lambda_fracs)
    return run_ball_comparison([instance], config)


@app.post("/upload")
async def upload(
    file: UploadFile = File(...),
    family: str = Form('lasso'),
    preset: str = Form('quick'),
    lambda_fracs: str = Form(''),
    normalize: bool = Form(True),
    format: str = Form('json'),
):
    """Run a ball comparison on an uploaded LIBSVM or CSV instance."""
    data = await file.read()
    key = _cache_key("upload", hashlib.md5(data).hexdigest(), file.filename, family, preset,
                     lambda_fracs, normalize)
    report = _get_cached(key)
    try:
        if report is None:
            fracs = [float(f) for f in lambda_fracs.split(',') if f.strip()]
            report = await asyncio.to_thread(_compare_upload_sync, data, file.filename,
                                             family, preset, fracs, normalize)
            _set_cached(key, report)
        return _render(report, format)
    except (ScreeningError, ValueError) as e:
        return _error(e)


def _solve_sync(req: SolveRequest) -> Dict[str, Any]:
    instance = load_instance(_synthetic_source(req))
    p = build_cell_problem(instance, req.family, req.lambda_frac)
    screening = ScreeningConfig(req.screening, req.period) if req.screening else None
    result = prox_grad_solve(p, SolveOptions(gap_tolerance=req.gap_tolerance, max_iters=req.max_iters,
                                             screening=screening, raise_on_failure=False))
    return {
        "success": True,
        "lambda": p.g.level,
        "result": result.to_dict(),
        "objectives": primal_dual_report(p, result.x, result.u),
    }


@app.post("/solve")
async def solve(req: SolveRequest):
    """Solve one synthetic instance, optionally with dynamic screening."""
    key = _cache_key("solve", req.model_dump_json())
    payload = _get_cached(key)
    try:
        if payload is None:
            payload = await asyncio.to_thread(_solve_sync, req)
            _set_cached(key, payload)
        return payload
    except (ScreeningError, ValueError) as e:
        return _error(e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
