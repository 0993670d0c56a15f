#!/usr/bin/env python3
"""
Tests for the performance logger used around reconstructions and Monte Carlo runs
"""
import logging
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.utils.performance_logger import PerformanceLogger

logger = logging.getLogger(__name__)


def test_track_records_statistics():
    perf_logger = PerformanceLogger("test-track")
    for _ in range(3):
        with perf_logger.track("fit", {"n_qubits": 2}) as perf:
            perf["iterations"] = 7

    stats = perf_logger.get_statistics("fit")["fit"]
    assert stats["count"] == 3
    assert stats["min_seconds"] <= stats["average_seconds"] <= stats["max_seconds"]
    assert perf_logger.timings["fit"][0]["details"] == {"iterations": 7}


def test_track_logs_failures_and_reraises(caplog):
    perf_logger = PerformanceLogger("test-failure")
    with caplog.at_level(logging.ERROR, logger="performance.test-failure"):
        with pytest.raises(RuntimeError):
            with perf_logger.track("fit"):
                raise RuntimeError("optimizer exploded")
    assert "FAILED fit" in caplog.text
    assert perf_logger.get_statistics() == {}


def test_timings_are_capped_per_operation():
    """Only the most recent records are kept for each operation"""
    perf_logger = PerformanceLogger("test-cap", history=5)
    for index in range(12):
        with perf_logger.track("fit") as perf:
            perf["index"] = index

    kept = perf_logger.timings["fit"]
    assert len(kept) == 5
    assert [record["details"]["index"] for record in kept] == [7, 8, 9, 10, 11]
    assert perf_logger.get_statistics("fit")["fit"]["count"] == 5


def test_unknown_timer_is_ignored():
    perf_logger = PerformanceLogger("test-unknown")
    assert perf_logger.stop_timer("fit:missing") == 0.0
    timer_id = perf_logger.start_timer("fit")
    assert perf_logger.stop_timer(timer_id) >= 0.0


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    sys.exit(pytest.main([__file__, "-v"]))
