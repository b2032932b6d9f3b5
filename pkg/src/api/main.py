"""
FastAPI service exposing the grounding, sampling and loss kernels plus
background strategy comparisons.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional
from uuid import uuid4

from fastapi import BackgroundTasks, FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from src import __version__
from src.config import get_settings
from src.errors import MomentSegError, ValidationError
from src.reports import ReportGenerator
from src.tools.curve import as_similarity
from src.tools.grounding import default_window, ground, moment_center
from src.tools.matching import finite_difference_grad, find_loss, find_loss_grad, max_relative_error, similarity_matrix
from src.tools.rng import RngStream
from src.tools.sampling import sample_frames
from src.tools.serialization import curve_from_dict, tokens_from_dict
from src.workflows.comparison import DEFAULT_STRATEGIES, compare_strategies
from src.workflows.pipeline import PipelineParams
from src.workflows.scenario import PRESETS, gen_scenario

logger = logging.getLogger(__name__)

# In-memory store for background comparison jobs
COMPARE_JOBS: Dict[str, Dict[str, Any]] = {}
# Finished jobs beyond this count are dropped, oldest first
MAX_COMPARE_JOBS = 100


def _prune_jobs(limit: int = MAX_COMPARE_JOBS) -> None:
    finished = [job_id for job_id, job in COMPARE_JOBS.items() if job["status"] in ("completed", "failed")]
    for job_id in finished[:max(len(COMPARE_JOBS) - limit, 0)]:
        del COMPARE_JOBS[job_id]


app = FastAPI(
    title="MomentSeg Toolkit API",
    description="Temporal grounding, moment-centric sampling and anchor-based propagation",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(ValidationError)
async def validation_error_handler(request: Request, exc: ValidationError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(MomentSegError)
async def toolkit_error_handler(request: Request, exc: MomentSegError):
    return JSONResponse(status_code=500, content={"detail": str(exc)})


class CurveRequest(BaseModel):
    """A curve on the wire; ``raw`` curves are conditioned onto ``frames`` frames."""
    values: List[float]
    raw: bool = False
    frames: Optional[int] = Field(default=None, ge=1)


class GroundRequest(CurveRequest):
    theta: Optional[float] = None
    window: Optional[int] = Field(default=None, ge=1)


class GroundResponse(BaseModel):
    center: int
    window: int
    interval: List[int]
    segments: List[Dict[str, Any]]
    used_fallback: bool


class SampleRequest(CurveRequest):
    strategy: str = "mcs"
    k: int = Field(default=8, ge=1)
    window: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)


class SampleResponse(BaseModel):
    indices: List[int]
    center: Optional[int] = None
    k_left: Optional[int] = None
    k_right: Optional[int] = None


class LossRequest(BaseModel):
    find: List[List[float]]
    frames: List[List[float]]
    labels: Optional[List[List[int]]] = None
    omega: Optional[List[List[int]]] = None
    tau: float = 0.07
    lambda_p: float = 2.0
    grad_check: bool = False


class LossResponse(BaseModel):
    loss: float
    grad: List[List[float]]
    max_rel_error: Optional[float] = None


class CompareRequest(BaseModel):
    """Scenario presets (or explicit scenario configs) and the runs to compare."""
    presets: List[str] = Field(default_factory=lambda: ["late-target"])
    scenarios: List[Dict[str, Any]] = Field(default_factory=list)
    strategies: List[str] = Field(default_factory=lambda: list(DEFAULT_STRATEGIES))
    seeds: List[int] = Field(default_factory=lambda: [0])
    k: Optional[int] = Field(default=None, ge=1)
    ks: Optional[List[int]] = None
    theta: Optional[float] = None
    update_lambda: Optional[float] = None
    excel: bool = False


class CompareJobStartResponse(BaseModel):
    job_id: str
    status: str


class CompareJobStatusResponse(BaseModel):
    job_id: str
    status: str
    error: Optional[str] = None
    result: Optional[Dict[str, Any]] = None


def _similarity(request: CurveRequest):
    settings = get_settings()
    curve = curve_from_dict({"values": request.values, "raw": request.raw})
    return as_similarity(curve, request.frames, settings.smooth_sigma, settings.smooth_radius)


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": "MomentSeg Toolkit API",
        "version": __version__,
        "endpoints": {
            "ground": "/ground",
            "sample": "/sample",
            "loss": "/loss",
            "compare": "/compare/start",
        },
    }


@app.get("/health")
async def health():
    """Health check endpoint"""
    try:
        settings = get_settings()
    except MomentSegError as e:
        return {"status": "unhealthy", "error": str(e)}
    return {"status": "healthy", "version": __version__, "output_dir": settings.output_dir}


@app.post("/ground", response_model=GroundResponse)
async def ground_endpoint(request: GroundRequest):
    """Moment center and best threshold segment of one curve."""
    curve = _similarity(request)
    theta = get_settings().theta if request.theta is None else request.theta
    result = ground(curve, theta, request.window)
    return GroundResponse(
        center=result.moment.center,
        window=result.moment.window,
        interval=list(result.interval),
        segments=[seg.model_dump() for seg in result.segments],
        used_fallback=result.used_fallback,
    )


@app.post("/sample", response_model=SampleResponse)
async def sample_endpoint(request: SampleRequest):
    """Select K frames from a curve with the requested strategy."""
    curve = _similarity(request)
    window = default_window(curve.length) if request.window is None else request.window
    center = moment_center(curve, window).center
    samples = sample_frames(request.strategy, curve, request.k, center, RngStream(seed=request.seed))
    return SampleResponse(
        indices=list(samples.indices),
        center=samples.center,
        k_left=samples.k_left,
        k_right=samples.k_right,
    )


@app.post("/loss", response_model=LossResponse)
async def loss_endpoint(request: LossRequest):
    """[FIND]-token matching loss, its gradient and an optional finite-difference check."""
    tm = tokens_from_dict(request.model_dump())
    logits = similarity_matrix(tm)
    grad = find_loss_grad(logits, tm)
    rel = None
    if request.grad_check:
        rel = max_relative_error(grad, finite_difference_grad(logits, tm))
    return LossResponse(loss=find_loss(logits, tm), grad=grad.tolist(), max_rel_error=rel)


def _run_compare_job(job_id: str, request_data: Dict[str, Any]) -> None:
    """Run a comparison in the background and store its result in COMPARE_JOBS."""
    COMPARE_JOBS[job_id]["status"] = "running"
    try:
        request = CompareRequest(**request_data)
        configs = []
        for name in request.presets:
            if name not in PRESETS:
                raise ValidationError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
            configs.append(PRESETS[name]())
        configs.extend(request.scenarios)
        corpus = [gen_scenario(config, seed=i) for i, config in enumerate(configs)]
        params = PipelineParams.from_settings(k=request.k, theta=request.theta, update_lambda=request.update_lambda)
        result = compare_strategies(
            corpus,
            request.strategies,
            params,
            request.seeds,
            max_workers=get_settings().max_workers,
            ks=request.ks,
        )
        reports = ReportGenerator().generate_reports(result, f"compare_{job_id}", excel=request.excel)
        COMPARE_JOBS[job_id]["result"] = {
            "summary": result.summary().to_dict(orient="records"),
            "ranking": result.ranking(),
            "report_paths": reports,
        }
        COMPARE_JOBS[job_id]["status"] = "completed"
    except Exception as e:
        logger.exception("Comparison job %s failed", job_id)
        COMPARE_JOBS[job_id]["status"] = "failed"
        COMPARE_JOBS[job_id]["error"] = str(e)


@app.post("/compare/start", response_model=CompareJobStartResponse)
async def compare_start(request: CompareRequest, background_tasks: BackgroundTasks):
    """
    Start a strategy comparison as a background job.

    Returns immediately with a job_id to poll.
    """
    job_id = f"compare-{uuid4().hex[:8]}"
    _prune_jobs(MAX_COMPARE_JOBS - 1)
    COMPARE_JOBS[job_id] = {"status": "queued", "error": None, "result": None}
    background_tasks.add_task(_run_compare_job, job_id, request.model_dump())
    return CompareJobStartResponse(job_id=job_id, status="started")


@app.get("/compare/status/{job_id}", response_model=CompareJobStatusResponse)
async def compare_status(job_id: str):
    """Current status and, when ready, the result of a comparison job."""
    job = COMPARE_JOBS.get(job_id)
    if not job:
        raise HTTPException(status_code=404, detail="Job not found")
    return CompareJobStatusResponse(
        job_id=job_id,
        status=job.get("status", "unknown"),
        error=job.get("error"),
        result=job.get("result"),
    )


@app.get("/reports/{report_type}/{filename}")
async def download_report(report_type: str, filename: str):
    """
    Download a generated report file.

    Args:
        report_type: 'csv', 'json' or 'excel'
        filename: Name of the report file
    """
    media_types = {
        "csv": "text/csv",
        "json": "application/json",
        "excel": "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    }
    if report_type not in media_types:
        raise HTTPException(status_code=400, detail="Invalid report type")
    if ".." in filename or "/" in filename or "\\" in filename:
        raise HTTPException(status_code=400, detail="Invalid filename")

    report_path = Path(get_settings().output_dir) / filename
    if not report_path.exists():
        raise HTTPException(status_code=404, detail="Report not found")
    return FileResponse(path=str(report_path), media_type=media_types[report_type], filename=filename)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
