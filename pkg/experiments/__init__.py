"""
Experiments Module - named, reproducible experiments for the front lab.

Each experiment is registered with smoke and full parameter profiles, runs one
pipeline and writes a text + CSV report.
"""

from .registry import Experiment, ExperimentRegistry, get_registry, register
from .report import Criterion, ExperimentReport, write_report
from .runner import RunContext, run_experiment

__all__ = [
    "Experiment",
    "ExperimentRegistry",
    "get_registry",
    "register",
    "Criterion",
    "ExperimentReport",
    "write_report",
    "RunContext",
    "run_experiment",
]
