import os
import logging
import time
import json
import uuid
from collections import deque
from contextlib import contextmanager
from datetime import datetime
from typing import Deque, Dict, Any, Iterator, Optional

from app.core.config import get_settings

logger = logging.getLogger(__name__)

# Reconstructions and Monte Carlo runs slower than this are flagged
SLOW_THRESHOLD_SECONDS = 60.0

# Most recent timing records kept per operation
TIMING_HISTORY = 1000


class PerformanceLogger:
    """
    Timing records for the long-running numerical operations
    (maximum-likelihood fits, Monte Carlo resampling, local-unitary searches).
    """

    def __init__(self, component: str, history: int = TIMING_HISTORY):
        """
        Initialize a performance logger for a specific component.

        Args:
            component: The name of the component being monitored (e.g. 'tomography')
            history: most recent timings kept per operation
        """
        self.component = component
        self._timers: Dict[str, Dict[str, Any]] = {}
        self.history = history
        self.timings: Dict[str, Deque[Dict[str, Any]]] = {}
        self.session_id = str(uuid.uuid4())[:8]

        self.logger = logging.getLogger(f'performance.{component}')
        settings = get_settings()
        if not self.logger.handlers and not settings.is_production:
            try:
                log_dir = os.path.join(settings.log_dir, 'performance')
                os.makedirs(log_dir, exist_ok=True)
                today = datetime.now().strftime('%Y-%m-%d')
                file_handler = logging.FileHandler(os.path.join(log_dir, f'{component}_{today}.log'))
                file_handler.setFormatter(
                    logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
                )
                self.logger.addHandler(file_handler)
            except OSError as e:
                logger.warning(f"Performance log file unavailable for {component}: {e}")

    def _record(self, operation: str, action: str, **fields) -> Dict[str, Any]:
        log_data = {
            "session_id": self.session_id,
            "component": self.component,
            "operation": operation,
            "action": action,
            "timestamp": datetime.now().isoformat(),
        }
        log_data.update(fields)
        return log_data

    def start_timer(self, operation: str, details: Optional[Dict[str, Any]] = None) -> str:
        """
        Start timing an operation.

        Returns:
            str: Timer ID for stopping the timer later
        """
        timer_id = f"{operation}:{uuid.uuid4().hex[:12]}"
        self._timers[timer_id] = {"operation": operation, "start": time.perf_counter()}
        log_data = self._record(operation, "start", details=details or {})
        self.logger.info(f"START {operation} - {json.dumps(log_data)}")
        return timer_id

    def stop_timer(self, timer_id: str, details: Optional[Dict[str, Any]] = None) -> float:
        """
        Stop timing an operation and record the result.

        Returns:
            float: Elapsed time in seconds
        """
        timer = self._timers.pop(timer_id, None)
        if timer is None:
            self.logger.warning(f"Timer ID {timer_id} not found")
            return 0.0

        operation = timer["operation"]
        elapsed = time.perf_counter() - timer["start"]
        self.timings.setdefault(operation, deque(maxlen=self.history)).append({
            "timer_id": timer_id,
            "elapsed_seconds": elapsed,
            "details": details or {},
        })

        log_data = self._record(operation, "stop", elapsed_seconds=elapsed, details=details or {})
        if elapsed > SLOW_THRESHOLD_SECONDS:
            log_data["warning"] = f"Operation took {elapsed:.2f} seconds"
            self.logger.warning(f"SLOW {operation} - {json.dumps(log_data)}")
        else:
            self.logger.info(f"STOP {operation} - {json.dumps(log_data)}")
        return elapsed

    def log_operation_failed(self, operation: str, error: Exception,
                             details: Optional[Dict[str, Any]] = None) -> None:
        log_data = self._record(
            operation, "failed",
            error=str(error),
            error_type=type(error).__name__,
            details=details or {},
        )
        self.logger.error(f"FAILED {operation} - {json.dumps(log_data)}")

    @contextmanager
    def track(self, operation: str, details: Optional[Dict[str, Any]] = None) -> Iterator[Dict[str, Any]]:
        """
        Time a block. The yielded dict is merged into the STOP record, so
        callers can attach results (iterations, convergence) as they go.
        """
        timer_id = self.start_timer(operation, details)
        outcome: Dict[str, Any] = {}
        try:
            yield outcome
        except Exception as e:
            self._timers.pop(timer_id, None)
            self.log_operation_failed(operation, e, details)
            raise
        self.stop_timer(timer_id, outcome)

    def get_statistics(self, operation: Optional[str] = None) -> Dict[str, Any]:
        """
        Count/total/mean/min/max elapsed seconds per operation.
        """
        operations = [operation] if operation else list(self.timings)
        stats = {}
        for op in operations:
            times = [record["elapsed_seconds"] for record in self.timings.get(op, [])]
            if times:
                stats[op] = {
                    "count": len(times),
                    "total_seconds": sum(times),
                    "average_seconds": sum(times) / len(times),
                    "min_seconds": min(times),
                    "max_seconds": max(times),
                }
        return stats


tomography_perf_logger = PerformanceLogger("tomography")
analysis_perf_logger = PerformanceLogger("analysis")
api_perf_logger = PerformanceLogger("api")
