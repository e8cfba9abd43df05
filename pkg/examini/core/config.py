"""
Configuration settings for the examini mini-app suite
"""

import os
from typing import Optional

import psutil
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _default_workers() -> int:
    return psutil.cpu_count(logical=True) or 1


class Settings:
    """Process settings from environment variables"""

    # Parallel runtime
    WORKERS: int = int(os.getenv("EXAMINI_WORKERS", str(_default_workers())))
    NEIGHBOR_TIMEOUT: float = float(os.getenv("EXAMINI_NEIGHBOR_TIMEOUT", "60"))

    # Output locations
    OUTPUT_DIR: str = os.getenv("EXAMINI_OUTPUT_DIR", "runs")
    BASELINE_DIR: str = os.getenv("EXAMINI_BASELINE_DIR", "baselines")

    # Logging settings
    LOG_LEVEL: str = os.getenv("EXAMINI_LOG_LEVEL", "INFO")
    LOG_FILE: Optional[str] = os.getenv("EXAMINI_LOG_FILE") or None

    # Artifact stamping
    ARTIFACT_VERSION: str = os.getenv("EXAMINI_ARTIFACT_VERSION", "0.3.0")

    def worker_cap(self, requested: Optional[int] = None) -> int:
        """Number of logical ranks allowed to compute at the same time"""
        cap = max(1, self.WORKERS)
        if requested is None:
            return cap
        return max(1, min(cap, requested))


# Global settings instance
settings = Settings()
