"""
Environment health check for the sketch-and-solve toolkit
"""
import importlib
import logging
import sys
import time
from typing import Dict, List, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

from .sketch import fwht_in_place

logger = logging.getLogger(__name__)

REQUIRED_PACKAGES = ("numpy", "scipy", "pydantic", "click", "rich", "tabulate")
MIN_PYTHON = (3, 10)
FWHT_BENCH_LENGTH = 1 << 20
FWHT_BENCH_LIMIT_S = 1.0


class EnvironmentChecker:
    """
    Runs the environment checks; each returns (status, message)
    """

    def __init__(self, bench_length: int = FWHT_BENCH_LENGTH, bench_limit_s: float = FWHT_BENCH_LIMIT_S):
        self.bench_length = bench_length
        self.bench_limit_s = bench_limit_s
        self.health_score = 0
        self.max_score = 0

    def check_python(self) -> Tuple[bool, str]:
        """Check Python version"""
        info = sys.version_info
        version = f"Python {info.major}.{info.minor}.{info.micro}"
        if (info.major, info.minor) < MIN_PYTHON:
            return False, f"{version} is older than {MIN_PYTHON[0]}.{MIN_PYTHON[1]}"
        return True, f"Python environment OK - {version}"

    def check_dependencies(self) -> Tuple[bool, str]:
        """Check that the required packages import"""
        missing: List[str] = []
        for name in REQUIRED_PACKAGES:
            try:
                importlib.import_module(name)
            except ImportError:
                missing.append(name)
        if missing:
            return False, f"Missing dependencies: {', '.join(missing)}"
        return True, "Dependencies available"

    def check_fwht_speed(self) -> Tuple[bool, str]:
        """Time one FWHT column; median of three runs"""
        column = np.random.default_rng(0).standard_normal(self.bench_length)
        timings = []
        for _ in range(3):
            work = column.copy()
            start = time.perf_counter()
            fwht_in_place(work)
            timings.append(time.perf_counter() - start)
        elapsed = float(np.median(timings))
        message = f"FWHT of length {self.bench_length}: {elapsed:.3f}s (limit {self.bench_limit_s:.1f}s)"
        return elapsed < self.bench_limit_s, message

    def run_full_check(self) -> Dict[str, Tuple[bool, str]]:
        """Run full health check and return results"""
        results = {
            "python": self.check_python(),
            "dependencies": self.check_dependencies(),
            "fwht_speed": self.check_fwht_speed(),
        }
        self.max_score = len(results)
        self.health_score = sum(1 for status, _ in results.values() if status)
        for name, (status, message) in results.items():
            if status:
                logger.info(f"✅ {name}: {message}")
            else:
                logger.error(f"❌ {name}: {message}")
        return results

    def print_health_report(self, console: Console, results: Dict[str, Tuple[bool, str]]) -> None:
        table = Table(title="🏥 Environment Health")
        table.add_column("Check", style="cyan")
        table.add_column("Status", justify="center")
        table.add_column("Details")
        for name, (status, message) in results.items():
            table.add_row(name, "✅" if status else "❌", message)
        console.print(table)
        percentage = (self.health_score / self.max_score * 100) if self.max_score > 0 else 0
        console.print(f"\n🏥 Health Score: {self.health_score}/{self.max_score} ({percentage:.1f}%)")
