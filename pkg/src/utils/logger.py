"""
Simulation Logging System
Console and rotating-file logging for simulation runs
"""

import json
import logging
import logging.handlers
import os
import sys
import threading
import traceback
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

try:
    from rich.console import Console
    from rich.logging import RichHandler
    from rich.theme import Theme
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False

try:
    import colorama
    from colorama import Fore, Style
    COLORAMA_AVAILABLE = True
except ImportError:
    COLORAMA_AVAILABLE = False


ROOT_LOGGER = "singlet"
RUN_LOGGER = f"{ROOT_LOGGER}.runs"
METRICS_LOGGER = f"{ROOT_LOGGER}.performance"

_stats_lock = threading.Lock()
_log_stats: Dict[str, int] = {"total_logs": 0, "errors": 0, "warnings": 0, "integrations": 0}


def _count(*keys: str):
    with _stats_lock:
        for key in keys:
            _log_stats[key] = _log_stats.get(key, 0) + 1


def get_log_stats() -> Dict[str, int]:
    with _stats_lock:
        return dict(_log_stats)


class SimulationLogger:
    """Thin wrapper over a stdlib logger with run counters"""

    def __init__(self, name: str = ROOT_LOGGER):
        self.name = name if name.startswith(ROOT_LOGGER) else f"{ROOT_LOGGER}.{name}"
        self.logger = logging.getLogger(self.name)

    def _emit(self, level: int, message: str, counters: tuple, extra: Dict[str, Any]):
        self.logger.log(level, message, extra=extra or None)
        _count("total_logs", *counters)

    def debug(self, message: str, **kwargs):
        self._emit(logging.DEBUG, message, (), kwargs)

    def info(self, message: str, **kwargs):
        self._emit(logging.INFO, message, (), kwargs)

    def warning(self, message: str, **kwargs):
        self._emit(logging.WARNING, message, ("warnings",), kwargs)

    def error(self, message: str, **kwargs):
        self._emit(logging.ERROR, message, ("errors",), kwargs)

    def critical(self, message: str, **kwargs):
        self._emit(logging.CRITICAL, message, ("errors",), kwargs)

    def run_event(self, event_type: str, details: Dict[str, Any]):
        """Log a simulation milestone (run started, converged, cell done)"""
        logging.getLogger(RUN_LOGGER).info(f"[RUN] {event_type}: {details}", extra={"event": event_type})
        if event_type == "integration_finished":
            _count("integrations")

    def performance_metric(self, metric_name: str, value: Any, unit: str = ""):
        """One CSV row in performance.log"""
        logging.getLogger(METRICS_LOGGER).info(f"{self.name},{metric_name},{value},{unit}")

    def get_stats(self) -> Dict[str, Any]:
        return get_log_stats()


_RUN_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)-22s | %(message)s"
_METRICS_FORMAT = "%(asctime)s,%(message)s"
_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class JsonLinesFormatter(logging.Formatter):
    """One JSON object per record; ``extra`` fields are carried through"""

    _STANDARD = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            "time": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "where": f"{record.module}:{record.lineno}",
            "pid": os.getpid(),
        }
        if record.exc_info:
            entry["exception"] = "".join(traceback.format_exception(*record.exc_info))
        entry.update({k: v for k, v in vars(record).items() if k not in self._STANDARD})
        return json.dumps(entry, default=str)


class _PlainConsoleFormatter(logging.Formatter):
    """Level-coloured lines when colorama is present, plain otherwise"""

    PALETTE = {
        logging.DEBUG: "DIM",
        logging.WARNING: "YELLOW",
        logging.ERROR: "RED",
        logging.CRITICAL: "RED",
    }

    def __init__(self):
        super().__init__("%(levelname)s: %(message)s")

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        if not COLORAMA_AVAILABLE or record.levelno not in self.PALETTE:
            return line
        tone = self.PALETTE[record.levelno]
        prefix = Style.DIM if tone == "DIM" else getattr(Fore, tone)
        return f"{prefix}{line}{Style.RESET_ALL}"


def _console_handler(level: int) -> logging.Handler:
    if RICH_AVAILABLE:
        theme = Theme({"logging.level.warning": "yellow", "logging.level.error": "red"})
        handler: logging.Handler = RichHandler(
            console=Console(stderr=True, theme=theme),
            show_path=False,
            markup=False,
            rich_tracebacks=True,
        )
    else:
        if COLORAMA_AVAILABLE:
            colorama.init()
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(_PlainConsoleFormatter())
    handler.setLevel(level)
    return handler


def _file_handler(path: Path, formatter: logging.Formatter, level: int,
                  max_bytes: int = 10 * 1024 * 1024) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(path, maxBytes=max_bytes, backupCount=3,
                                                   encoding="utf-8")
    handler.setFormatter(formatter)
    handler.setLevel(level)
    return handler


def _detach(logger: logging.Logger):
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def setup_logging(verbose: bool = False, log_dir: Optional[str] = None,
                  structured: bool = False, level: str = "INFO") -> SimulationLogger:
    """Configure the package logger tree.

    Console output always; file handlers only when ``log_dir`` is given.
    Calling again replaces the previous handlers.
    """
    root = logging.getLogger(ROOT_LOGGER)
    metrics = logging.getLogger(METRICS_LOGGER)
    _detach(root)
    _detach(metrics)
    root.setLevel(logging.DEBUG)
    metrics.propagate = False

    console_level = logging.DEBUG if verbose else getattr(logging, level.upper(), logging.INFO)
    root.addHandler(_console_handler(console_level))

    if log_dir:
        directory = Path(log_dir) / "logs"
        directory.mkdir(parents=True, exist_ok=True)
        run_format = JsonLinesFormatter() if structured else logging.Formatter(_RUN_FORMAT, _DATE_FORMAT)
        root.addHandler(_file_handler(directory / "simulation.log", run_format, logging.DEBUG))
        root.addHandler(_file_handler(directory / "errors.log", run_format, logging.ERROR))
        metrics.addHandler(_file_handler(directory / "performance.log",
                                         logging.Formatter(_METRICS_FORMAT, _DATE_FORMAT),
                                         logging.INFO, max_bytes=5 * 1024 * 1024))

    return SimulationLogger(ROOT_LOGGER)


def shutdown_logging():
    """Close file handlers so output directories can be moved or removed"""
    _detach(logging.getLogger(ROOT_LOGGER))
    _detach(logging.getLogger(METRICS_LOGGER))


def get_logger(name: Optional[str] = None) -> SimulationLogger:
    """Get a logger; no handlers are attached here"""
    return SimulationLogger(name or ROOT_LOGGER)
