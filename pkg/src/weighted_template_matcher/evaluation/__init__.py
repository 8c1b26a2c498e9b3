"""Evaluation protocol and report rendering."""

from .protocol import (
    BASELINE_KIND,
    DEFAULT_COUNTS,
    DEFAULT_THRESHOLD_PX,
    EvalSample,
    ExperimentConfig,
    MatchRecord,
    build_report,
    detection_error,
    detection_rate,
    run_experiment,
    side_templates,
)
from .report import REPORT_COLUMNS, EvalReport, format_delta, format_percent, format_report

__all__ = [
    "BASELINE_KIND",
    "DEFAULT_COUNTS",
    "DEFAULT_THRESHOLD_PX",
    "REPORT_COLUMNS",
    "EvalReport",
    "EvalSample",
    "ExperimentConfig",
    "MatchRecord",
    "build_report",
    "detection_error",
    "detection_rate",
    "format_delta",
    "format_percent",
    "format_report",
    "run_experiment",
    "side_templates",
]
