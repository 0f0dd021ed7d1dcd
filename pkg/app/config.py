# Partitioned task offloading study for 5G MEC
import os
from typing import List

from dotenv import load_dotenv

load_dotenv()


def _default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


class Settings:
    # Logging settings
    AUDIT_LOG_FILE: str = os.getenv("AUDIT_LOG_FILE", "logs/audit.log")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Experiment execution
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "results")
    MAX_WORKERS: int = int(os.getenv("MAX_WORKERS", str(_default_workers())))
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "2024"))
    RECORD_WALL_TIME: bool = os.getenv("RECORD_WALL_TIME", "false").lower() == "true"

    # Objective: "per_task" adds the offloaded share of each dropped task to its term,
    # "global" adds the drop count once
    DROP_PENALTY: str = os.getenv("DROP_PENALTY", "per_task").lower()

    # HTTP service
    CORS_ORIGINS: List[str] = os.getenv("CORS_ORIGINS", "*").split(",")
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")

    # Request size guard for the HTTP service
    MAX_API_TASKS: int = int(os.getenv("MAX_API_TASKS", "400"))

    def is_production(self) -> bool:
        return self.ENVIRONMENT.lower() == "production"


settings = Settings()
