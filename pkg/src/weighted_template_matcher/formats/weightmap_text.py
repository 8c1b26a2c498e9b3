"""Plain-text weight-map format.

Line 1 holds ``width height``; then ``height`` rows of ``width`` space-separated
values, top row first. Values of at least 1 are written with eight decimals (nine or
more significant digits); smaller values use eight-digit scientific notation.
"""

from __future__ import annotations

import numpy as np

from ..core import FormatParseError
from ..weightmaps import WeightMap, weight_map_from_array


def format_weight(value: float) -> str:
    """Canonical text for one weight."""
    return f"{value:.8f}" if value >= 1.0 else f"{value:.8e}"


def write_weightmap(weight_map: WeightMap) -> str:
    """Serialize a map; equal maps always produce identical text."""
    lines = [f"{weight_map.width} {weight_map.height}"]
    lines.extend(" ".join(format_weight(float(value)) for value in row) for row in weight_map.weights)
    return "\n".join(lines) + "\n"


def _dimensions(line: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2 or not all(part.isdigit() for part in parts):
        raise FormatParseError(f"expected 'width height', got {line!r}", line=1)
    width, height = int(parts[0]), int(parts[1])
    if width < 1 or height < 1:
        raise FormatParseError(f"dimensions must be at least 1x1, got {width}x{height}", line=1)
    return width, height


def read_weightmap(text: str) -> WeightMap:
    """Parse a map written by ``write_weightmap``.

    Raises:
        FormatParseError: Malformed dimension line, wrong row or value count,
            non-numeric or non-positive value, or trailing lines.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatParseError("empty weight map", line=1)
    width, height = _dimensions(lines[0])
    if len(lines) - 1 != height:
        raise FormatParseError(f"expected {height} rows, found {len(lines) - 1}", line=min(len(lines), height + 1) + 1)
    weights = np.empty((height, width), dtype=np.float64)
    for row_index, line in enumerate(lines[1:]):
        line_number = row_index + 2
        parts = line.split()
        if len(parts) != width:
            raise FormatParseError(f"expected {width} values, got {len(parts)}", line=line_number)
        for column, part in enumerate(parts):
            try:
                value = float(part)
            except ValueError as exc:
                raise FormatParseError(f"weight {part!r} is not a number", line=line_number) from exc
            if not np.isfinite(value) or value <= 0.0:
                raise FormatParseError(f"weight {part!r} must be finite and greater than 0", line=line_number)
            weights[row_index, column] = value
    return weight_map_from_array(weights)
