"""
Experiment API endpoints
"""
import logging
from pathlib import Path

from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool

from .. import schemas
from ..config import get_settings
from ..configfile import parse_config
from ..exceptions import AttsyncError
from ..services import runner

router = APIRouter(prefix="/api/experiments", tags=["Experiments"])
settings = get_settings()
logger = logging.getLogger(__name__)

_STATUS_BY_EXIT_CODE = {1: 400, 2: 422, 3: 409}


def to_http_error(e: AttsyncError) -> HTTPException:
    """Map a library error onto an HTTP status, keeping the one-line reason"""
    return HTTPException(
        status_code=_STATUS_BY_EXIT_CODE.get(e.exit_code, 400),
        detail={"error": e.reason, "message": e.one_line()},
    )


@router.post("/check", response_model=schemas.CheckReport)
async def check_experiment(request: schemas.CheckRequest):
    """
    Connectivity verdicts, root set, initial-condition class and transform for a config.
    No simulation is run.
    """
    try:
        config = parse_config(request.config)
        return runner.check(config)
    except AttsyncError as e:
        logger.warning(f"check rejected: {e.one_line()}")
        raise to_http_error(e)


@router.post("/run", response_model=schemas.RunSummary)
async def run_experiment(request: schemas.RunRequest):
    """
    Simulate a config and write its files under OUTPUT_DIR/<name>/

    Request Body:
    {
        "config": "[graph]\\nnodes 2\\n...",
        "name": "my-run",
        "svg": false
    }
    """
    try:
        config = parse_config(request.config)
        if request.name:
            config = config.model_copy(update={"name": request.name})
        out_dir = Path(settings.OUTPUT_DIR) / config.name
        _, summary = await run_in_threadpool(runner.run, config, out_dir, request.svg)
        return summary
    except AttsyncError as e:
        logger.warning(f"run rejected: {e.one_line()}")
        raise to_http_error(e)


@router.get("/goldens", response_model=schemas.GoldensReport)
async def run_goldens():
    """Run the bundled cases and report their acceptance criteria"""
    report = await run_in_threadpool(runner.goldens, Path(settings.OUTPUT_DIR) / "goldens")
    if not report.passed:
        logger.warning("Golden cases failed: " + ", ".join(c.case for c in report.cases if not c.passed))
    return report
