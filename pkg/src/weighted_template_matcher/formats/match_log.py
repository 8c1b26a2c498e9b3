"""Per-image match log and the machine-readable report CSV.

Floats are written with ``repr`` so every value reads back bit-for-bit. A record
whose templates all failed leaves the window fields empty, with ``score`` ``nan``
and ``error`` ``inf``.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import cast

from ..core import EYE_LABELS, EyeLabel, FormatParseError, PixelPoint, Point
from ..evaluation import EvalReport, MatchRecord
from .common import iter_rows, parse_float, parse_int, render

MATCH_LOG_HEADER = (
    "image_path",
    "eye",
    "kind",
    "count",
    "template_id",
    "top_left_x",
    "top_left_y",
    "center_x",
    "center_y",
    "score",
    "error",
)


def _window_fields(record: MatchRecord) -> tuple[str, str, str, str, str]:
    if record.template_id is None or record.top_left is None or record.center is None:
        return ("", "", "", "", "")
    return (
        str(record.template_id),
        str(record.top_left.x),
        str(record.top_left.y),
        repr(float(record.center.x)),
        repr(float(record.center.y)),
    )


def write_match_log(records: Sequence[MatchRecord]) -> str:
    """Serialize records in the given order."""
    rows = [
        (record.image_id, record.eye, record.kind, record.count, *_window_fields(record), repr(float(record.score)), repr(float(record.error)))
        for record in records
    ]
    return render(MATCH_LOG_HEADER, rows)


def read_match_log(text: str) -> list[MatchRecord]:
    """Parse a log written by ``write_match_log``.

    Raises:
        FormatParseError: Bad header, column count, eye, or number, with the line number.
    """
    records: list[MatchRecord] = []
    for line, fields in iter_rows(text, MATCH_LOG_HEADER):
        image_id, eye, kind, count, template_id, tlx, tly, cx, cy, score, error = fields
        if eye not in EYE_LABELS:
            raise FormatParseError(f"eye must be one of {', '.join(EYE_LABELS)}, got {eye!r}", line=line)
        window = (template_id, tlx, tly, cx, cy)
        if all(value == "" for value in window):
            identifier, top_left, center = None, None, None
        else:
            identifier = parse_int(template_id, "template_id", line)
            top_left = PixelPoint(parse_int(tlx, "top_left_x", line), parse_int(tly, "top_left_y", line))
            center = Point(parse_float(cx, "center_x", line), parse_float(cy, "center_y", line))
        records.append(
            MatchRecord(
                image_id=image_id,
                eye=cast(EyeLabel, eye),
                kind=kind,
                count=parse_int(count, "count", line, minimum=1),
                template_id=identifier,
                top_left=top_left,
                center=center,
                score=parse_float(score, "score", line),
                error=parse_float(error, "error", line),
            ),
        )
    return records


def write_report_csv(report: EvalReport) -> str:
    """Full-precision ``eye,kind,count,rate,delta`` rows in report order."""
    return report.to_frame().to_csv(index=False, lineterminator="\n")
