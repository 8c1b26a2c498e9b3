"""Shared helpers for the fixed-header comma-separated formats.

Fields are never quoted or escaped, so a value containing a comma is a parse error
rather than a silently shifted row.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence

from ..core import FormatParseError


def iter_rows(text: str, header: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)`` for every data row after an exact header.

    A single trailing newline is allowed; blank lines anywhere else are errors.

    Raises:
        FormatParseError: Header mismatch, blank line, or wrong column count.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    expected_header = ",".join(header)
    if not lines or lines[0] != expected_header:
        raise FormatParseError(f"expected header {expected_header!r}", line=1)
    for index, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(header):
            raise FormatParseError(f"expected {len(header)} columns, got {len(fields)}", line=index)
        yield index, fields


def parse_int(value: str, name: str, line: int, *, minimum: int | None = 0) -> int:
    """Parse a plain decimal integer field."""
    stripped = value.lstrip("-") if minimum is None else value
    if not stripped.isdigit() or not stripped.isascii():
        raise FormatParseError(f"{name} must be an integer, got {value!r}", line=line)
    parsed = int(value)
    if minimum is not None and parsed < minimum:
        raise FormatParseError(f"{name} must be >= {minimum}, got {parsed}", line=line)
    return parsed


def parse_float(value: str, name: str, line: int) -> float:
    """Parse a float field; ``inf`` and ``nan`` spellings are accepted."""
    try:
        return float(value)
    except ValueError as exc:
        raise FormatParseError(f"{name} must be a number, got {value!r}", line=line) from exc


def render(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Join a header and rows with commas and ``\\n`` line endings."""
    lines = [",".join(header)]
    lines.extend(",".join(str(field) for field in row) for row in rows)
    return "\n".join(lines) + "\n"
