"""Ground-truth eye annotation CSV."""

from __future__ import annotations

from collections.abc import Sequence

from ..core import FormatParseError, PixelPoint
from ..synth import Annotation
from .common import iter_rows, parse_int, render

ANNOTATION_HEADER = ("image_path", "right_eye_x", "right_eye_y", "left_eye_x", "left_eye_y")


def read_annotations(text: str) -> list[Annotation]:
    """Parse one annotation per data row; a header-only file is an empty list.

    Raises:
        FormatParseError: Bad header, column count, or coordinate, with the line number.
    """
    annotations: list[Annotation] = []
    for line, fields in iter_rows(text, ANNOTATION_HEADER):
        if not fields[0]:
            raise FormatParseError("image_path must not be empty", line=line)
        rx, ry, lx, ly = (parse_int(value, name, line) for value, name in zip(fields[1:], ANNOTATION_HEADER[1:]))
        annotations.append(Annotation(image_id=fields[0], right_eye=PixelPoint(rx, ry), left_eye=PixelPoint(lx, ly)))
    return annotations


def write_annotations(annotations: Sequence[Annotation]) -> str:
    """Serialize annotations in the given order."""
    for annotation in annotations:
        if "," in annotation.image_id or "\n" in annotation.image_id:
            raise ValueError(f"image path {annotation.image_id!r} must not contain commas or newlines")
    rows = [
        (item.image_id, item.right_eye.x, item.right_eye.y, item.left_eye.x, item.left_eye.y)
        for item in annotations
    ]
    return render(ANNOTATION_HEADER, rows)
