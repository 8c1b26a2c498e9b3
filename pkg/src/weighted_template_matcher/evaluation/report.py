"""Evaluation report container and its text and tabular renderings."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import TYPE_CHECKING

import pandas as pd

from ..core import EyeLabel

if TYPE_CHECKING:
    from .protocol import MatchRecord

RateKey = tuple[EyeLabel, str, int]
REPORT_COLUMNS = ("eye", "kind", "count", "rate", "delta")
EYE_ROW_NAMES: Mapping[str, str] = {"right": "Right eye", "left": "Left eye"}


@dataclass(frozen=True, slots=True, eq=False)
class EvalReport:
    """Detection rates per (eye, kind, count) and their deltas to the baseline.

    Rates keep full precision; rounding happens only in ``format_report``.
    """

    rates: dict[RateKey, float]
    deltas: dict[RateKey, float]
    eyes: tuple[EyeLabel, ...]
    kinds: tuple[str, ...]
    counts: tuple[int, ...]
    baseline: str
    threshold_px: float
    records: tuple[MatchRecord, ...] = ()
    notes: tuple[str, ...] = field(default_factory=tuple)

    def keys(self) -> list[RateKey]:
        """Cells in report order: eye, then kind, then count."""
        return [(eye, kind, count) for eye in self.eyes for kind in self.kinds for count in self.counts]

    def to_frame(self) -> pd.DataFrame:
        """One row per cell with columns ``eye, kind, count, rate, delta``."""
        rows = [(eye, kind, count, self.rates[eye, kind, count], self.deltas[eye, kind, count]) for eye, kind, count in self.keys()]
        return pd.DataFrame.from_records(rows, columns=list(REPORT_COLUMNS))


# Rates are ratios of small counts; twelve places drop float noise from differences.
RATE_PLACES = Decimal("1e-12")


def _round_percent(value: float) -> int:
    fraction = Decimal(repr(value)).quantize(RATE_PLACES)
    return int((fraction * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def format_percent(rate: float) -> str:
    """Whole percentage, halves rounded away from zero: ``0.876`` becomes ``88%``."""
    return f"{_round_percent(rate)}%"


def format_delta(delta: float) -> str:
    """Signed whole percentage; zero prints as ``+0%``."""
    rounded = _round_percent(delta)
    return f"{'-' if rounded < 0 else '+'}{abs(rounded)}%"


def _table(title: str, report: EvalReport, kind: str, cell: Mapping[RateKey, str]) -> list[str]:
    label_width = max(len(EYE_ROW_NAMES[eye]) for eye in report.eyes)
    column_width = max(5, *(len(str(count)) for count in report.counts), *(len(text) for text in cell.values()))
    header = " " * label_width + "".join(f"  {count:>{column_width}}" for count in report.counts)
    lines = [title, header]
    for eye in report.eyes:
        values = "".join(f"  {cell[eye, kind, count]:>{column_width}}" for count in report.counts)
        lines.append(f"{EYE_ROW_NAMES[eye]:<{label_width}}{values}")
    return lines


def format_report(report: EvalReport) -> str:
    """Render one rate table per kind and one delta table per non-baseline kind.

    Columns are template counts, rows are the right and left eye.
    """
    lines = [f"# {note}" for note in report.notes]
    threshold = f"{report.threshold_px:g}"
    for kind in report.kinds:
        cells = {key: format_percent(report.rates[key]) for key in report.keys() if key[1] == kind}
        lines.extend(["", *_table(f"Detection percentage (error <{threshold} pixels): {kind}", report, kind, cells)])
    for kind in report.kinds:
        if kind == report.baseline:
            continue
        cells = {key: format_delta(report.deltas[key]) for key in report.keys() if key[1] == kind}
        title = f"Detection rate increase compared to {report.baseline} weight distribution: {kind}"
        lines.extend(["", *_table(title, report, kind, cells)])
    return "\n".join(lines) + "\n"
