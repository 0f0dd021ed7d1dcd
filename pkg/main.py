# HTTP service for the partitioned task offloading solvers
from datetime import datetime
import logging

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from app.audit_logger import AuditLogger
from app.config import settings
from app.models import (
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    SolverName,
    SolveRequest,
    SolveResult,
    WorkloadRequest,
    WorkloadResponse,
    WorkloadSpec,
)
from app.objective import assess
from app.scheduler import drop_count, utilization
from app.solvers import solve
from app.workload import generate_workload

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper()),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

app = FastAPI(
    title="MEC Partition Offloading API",
    description="Workload generation, objective evaluation and offloading solvers for multi-access edge computing",
    version="1.0.0",
    docs_url="/docs" if not settings.is_production() else None,  # Disable docs in production
    redoc_url="/redoc" if not settings.is_production() else None,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


def _check_size(task_count: int) -> None:
    if task_count > settings.MAX_API_TASKS:
        raise HTTPException(
            status_code=400,
            detail=f"At most {settings.MAX_API_TASKS} tasks per request, got {task_count}",
        )


@app.get("/")
async def root():
    return {
        "message": "MEC Partition Offloading API",
        "version": "1.0.0",
        "endpoints": {
            "workloads": "/workloads",
            "evaluate": "/evaluate",
            "solve": "/solve",
            "health": "/health",
        },
        "solvers": [solver.value for solver in SolverName],
    }


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Health check endpoint"""
    return HealthResponse(
        status="healthy", solvers=list(SolverName), timestamp=datetime.now()
    )


@app.post("/workloads", response_model=WorkloadResponse)
def create_workload(workload_request: WorkloadRequest):
    """Generate a seeded task list"""
    _check_size(workload_request.max_tasks)
    try:
        spec = WorkloadSpec(**workload_request.model_dump())
        tasks = generate_workload(spec)
        return WorkloadResponse(tasks=tasks, count=len(tasks))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Workload generation failed: {str(e)}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate_decision(evaluate_request: EvaluateRequest):
    """
    Simulate a decision and report its objective value, constraint
    violations, drops and utilization.
    """
    _check_size(len(evaluate_request.tasks))
    try:
        assessment = assess(
            evaluate_request.tasks,
            evaluate_request.decision,
            evaluate_request.mode,
            evaluate_request.processing,
            evaluate_request.radio,
            evaluate_request.servers,
            evaluate_request.drop_penalty,
        )
        outcome = assessment.outcome
        mec_util, local_util = utilization(outcome, outcome.last_completion_s or 1.0)
        return EvaluateResponse(
            value=assessment.value,
            violations=assessment.violations,
            drop_count=drop_count(outcome),
            mec_utilization=mec_util,
            local_utilization=local_util,
        )
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Evaluation failed: {str(e)}")
        raise HTTPException(status_code=500, detail="Internal server error")


@app.post("/solve", response_model=SolveResult)
def solve_instance(solve_request: SolveRequest, request: Request):
    """
    Solve an instance with the exact, cuckoo or baseline solver.

    Every request is written to the audit log.
    """
    _check_size(len(solve_request.tasks))
    solver = solve_request.solver.value
    mode = solve_request.mode.value
    task_count = len(solve_request.tasks)
    try:
        result = solve(
            solve_request.tasks,
            solve_request.mode,
            solve_request.solver,
            model=solve_request.processing,
            radio=solve_request.radio,
            servers=solve_request.servers,
            exact=solve_request.exact,
            cuckoo=solve_request.cuckoo,
            drop_penalty=solve_request.drop_penalty,
        )
        AuditLogger.log_solve_request(
            solver, mode, task_count, request, objective=result.best_value.total
        )
        logger.info(f"Solved {task_count} tasks with {solver} in {mode} mode")
        return result

    except ValueError as e:
        AuditLogger.log_solve_request(
            solver, mode, task_count, request, success=False, error_message=str(e)
        )
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        AuditLogger.log_solve_request(
            solver, mode, task_count, request, success=False, error_message=str(e)
        )
        logger.error(f"Solve failed ({solver}, {mode}): {str(e)}")
        raise HTTPException(status_code=500, detail="Internal server error")


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=8000)
