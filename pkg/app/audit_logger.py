"""
Audit logging for experiment runs and solve requests
"""

import json
import logging
import os
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from fastapi import Request

from app.config import settings

audit_logger = logging.getLogger("audit")
audit_logger.setLevel(logging.INFO)

audit_formatter = logging.Formatter(
    "%(asctime)s - AUDIT - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
)


def _ensure_handler() -> None:
    """Attach the file handler on first use so importing never touches the disk"""
    if audit_logger.handlers:
        return
    directory = os.path.dirname(settings.AUDIT_LOG_FILE)
    if directory:
        os.makedirs(directory, exist_ok=True)
    audit_handler = logging.FileHandler(settings.AUDIT_LOG_FILE)
    audit_handler.setLevel(logging.INFO)
    audit_handler.setFormatter(audit_formatter)
    audit_logger.addHandler(audit_handler)


class AuditLogger:
    """Centralized audit logging for experiment and service events"""

    @staticmethod
    def log_event(
        event_type: str,
        details: Optional[Dict[str, Any]] = None,
        success: bool = True,
        error_message: Optional[str] = None,
        request: Optional[Request] = None,
    ):
        """Log one event as a JSON line"""
        _ensure_handler()

        audit_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "event_type": event_type,
            "success": success,
            "details": details or {},
        }
        if request is not None:
            audit_entry["client_ip"] = request.client.host if request.client else "unknown"
            audit_entry["method"] = request.method
            audit_entry["url"] = str(request.url)

        if error_message:
            audit_entry["error"] = error_message

        audit_logger.info(json.dumps(audit_entry, default=str))

    @staticmethod
    def log_experiment_started(job_count: int, ue_counts, modes, solvers, seed: int):
        AuditLogger.log_event(
            event_type="experiment_started",
            details={
                "job_count": job_count,
                "ue_counts": list(ue_counts),
                "modes": [str(getattr(mode, "value", mode)) for mode in modes],
                "solvers": [str(getattr(solver, "value", solver)) for solver in solvers],
                "seed": seed,
            },
        )

    @staticmethod
    def log_run_completed(
        ue_count: int,
        mode: str,
        solver: str,
        run: int,
        objective: float,
        drops: int,
    ):
        AuditLogger.log_event(
            event_type="run_completed",
            details={
                "ue_count": ue_count,
                "mode": mode,
                "solver": solver,
                "run": run,
                "objective": objective,
                "drops": drops,
            },
        )

    @staticmethod
    def log_report_written(output_dir: str, files: int):
        AuditLogger.log_event(
            event_type="report_written",
            details={"output_dir": output_dir, "files": files},
        )

    @staticmethod
    def log_solve_request(
        solver: str,
        mode: str,
        task_count: int,
        request: Optional[Request] = None,
        objective: Optional[float] = None,
        success: bool = True,
        error_message: Optional[str] = None,
    ):
        """Log solve requests from the HTTP service"""
        details = {"solver": solver, "mode": mode, "task_count": task_count}
        if objective is not None:
            details["objective"] = objective

        AuditLogger.log_event(
            event_type="solve_request",
            details=details,
            success=success,
            error_message=error_message,
            request=request,
        )

    @staticmethod
    def log_failure(operation: str, error_message: str, request: Optional[Request] = None):
        AuditLogger.log_event(
            event_type="failure",
            details={"operation": operation},
            success=False,
            error_message=error_message,
            request=request,
        )
