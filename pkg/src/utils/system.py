"""
System Utilities
Host description and worker sizing
"""

import os
import platform
import sys
from typing import Dict, Any

import psutil

from .logger import get_logger

logger = get_logger(__name__)


def default_jobs() -> int:
    """Worker count for sweeps and restarts: one per logical core"""
    count = psutil.cpu_count(logical=True) or os.cpu_count() or 1
    return max(1, int(count))


def describe_system() -> Dict[str, Any]:
    """Platform facts echoed into run summaries"""
    memory = psutil.virtual_memory()
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cores": psutil.cpu_count(logical=True),
        "physical_cores": psutil.cpu_count(logical=False),
        "memory_gb": round(memory.total / (1024 ** 3), 1),
    }


def process_memory_mb() -> float:
    """Resident set size of the current process"""
    try:
        return psutil.Process().memory_info().rss / (1024 ** 2)
    except psutil.Error:
        return 0.0


def check_system_requirements() -> bool:
    """Python 3.9+ and at least 1 GB of memory"""
    requirements_met = True

    version = sys.version_info
    if version < (3, 9):
        logger.error(f"Python 3.9+ required. Found: {version.major}.{version.minor}")
        requirements_met = False

    memory = psutil.virtual_memory()
    if memory.total < 1024 ** 3:
        logger.error(f"Insufficient memory: {memory.total / (1024 ** 3):.1f} GB (minimum: 1 GB)")
        requirements_met = False

    return requirements_met
