"""
Error Handling
Exception hierarchy and a tracker for failures that are recorded instead of raised
"""

import threading
import time
import traceback
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Deque, Dict, Optional

from utils.logger import get_logger

logger = get_logger(__name__)


class SimulationError(Exception):
    """Base class for every error raised by this package"""


class InvalidDimensionError(SimulationError, ValueError):
    """Operator, state or slot dimensions do not fit together"""


class ConfigError(SimulationError, ValueError):
    """Invalid scenario configuration or parameter set"""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class NumericalFailureError(SimulationError, RuntimeError):
    """Integrator could not produce a trustworthy state"""

    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        suffix = f" (t={t:.6g})" if t is not None else ""
        super().__init__(f"{message}{suffix}")


class PositivityError(NumericalFailureError):
    """Density matrix acquired an eigenvalue below the positivity floor"""


class SingularityError(SimulationError, ZeroDivisionError):
    """An analytic expression hit a resonance (vanishing denominator)"""


class DegenerateInputError(SimulationError, ValueError):
    """Input leaves the requested quantity undefined"""


class DomainError(SimulationError, ValueError):
    """Argument outside the mathematical domain of a closed form"""


class OptimizationFailureError(SimulationError, RuntimeError):
    """Search ended without a single finite objective value"""


class ErrorSeverity(Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


@dataclass
class ErrorEvent:
    when: float
    severity: ErrorSeverity
    component: str
    message: str
    kind: str
    trace: str
    context: Dict[str, Any] = field(default_factory=dict)


class ErrorTracker:
    """Collects handled errors so runs can report them in their summary"""

    def __init__(self, max_history: int = 1000):
        self.history: Deque[ErrorEvent] = deque(maxlen=max_history)
        self.by_type: Counter = Counter()
        self.by_severity: Counter = Counter()
        self._lock = threading.Lock()

    def record(self, component: str, error: BaseException,
               severity: ErrorSeverity = ErrorSeverity.MEDIUM, **context) -> ErrorEvent:
        event = ErrorEvent(
            when=time.time(),
            severity=severity,
            component=component,
            message=str(error),
            kind=type(error).__name__,
            trace="".join(traceback.format_exception(type(error), error, error.__traceback__)),
            context=context,
        )
        with self._lock:
            self.history.append(event)
            self.by_type[event.kind] += 1
            self.by_severity[severity] += 1
        return event

    def reset(self):
        with self._lock:
            self.history.clear()
            self.by_type.clear()
            self.by_severity.clear()

    def get_stats(self) -> Dict[str, Any]:
        with self._lock:
            return {
                "total_errors": sum(self.by_type.values()),
                "critical_errors": self.by_severity[ErrorSeverity.CRITICAL],
                "error_patterns": dict(self.by_type),
                "last_error": self.history[-1].message if self.history else "",
            }


_tracker = ErrorTracker()


def get_error_tracker() -> ErrorTracker:
    return _tracker


def handle_error(component: str, error: BaseException,
                 severity: ErrorSeverity = ErrorSeverity.MEDIUM, **context) -> ErrorEvent:
    """Record and log an error without re-raising it"""
    event = _tracker.record(component, error, severity, **context)
    message = f"Error in {component}: {error}"
    if severity in (ErrorSeverity.HIGH, ErrorSeverity.CRITICAL):
        logger.error(message)
    else:
        logger.warning(message)
    return event
