"""
Utilities Module
Logging, error handling, system description and worker pools
"""

from .logger import setup_logging, get_logger, shutdown_logging, SimulationLogger
from .system import default_jobs, describe_system, check_system_requirements
from .workers import parallel_map

__all__ = [
    "setup_logging",
    "get_logger",
    "shutdown_logging",
    "SimulationLogger",
    "default_jobs",
    "describe_system",
    "check_system_requirements",
    "parallel_map"
]
