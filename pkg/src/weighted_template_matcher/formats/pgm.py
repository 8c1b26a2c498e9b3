"""Binary 8-bit PGM (P5) reader and canonical writer."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core import FormatParseError, GrayImage, quantize

MAGIC = b"P5"
WHITESPACE = b" \t\n\v\f\r"
MAX_MAXVAL = 255


def _skip_whitespace_and_comments(data: bytes, position: int) -> int:
    while position < len(data):
        byte = data[position : position + 1]
        if byte == b"#":
            newline = data.find(b"\n", position)
            position = len(data) if newline < 0 else newline + 1
        elif byte in WHITESPACE:
            position += 1
        else:
            break
    return position


def _read_header_int(data: bytes, position: int, name: str) -> tuple[int, int]:
    position = _skip_whitespace_and_comments(data, position)
    start = position
    while position < len(data) and data[position : position + 1].isdigit():
        position += 1
    if position == start:
        raise FormatParseError(f"expected a decimal {name} in the PGM header", offset=start)
    if position < len(data) and data[position : position + 1] not in WHITESPACE and data[position : position + 1] != b"#":
        raise FormatParseError(f"non-numeric {name} in the PGM header", offset=position)
    return int(data[start:position]), position


def read_pgm(data: bytes) -> GrayImage:
    """Parse a P5 file with ``maxval <= 255``; intensities are taken verbatim.

    Raises:
        FormatParseError: Wrong magic, bad header token, ``maxval > 255``, short
            raster, or bytes after the raster. The message carries the byte offset.
    """
    if not data.startswith(MAGIC):
        raise FormatParseError("expected magic P5", offset=0)
    position = len(MAGIC)
    if position >= len(data) or (data[position : position + 1] not in WHITESPACE and data[position : position + 1] != b"#"):
        raise FormatParseError("expected whitespace after the magic", offset=position)
    width, position = _read_header_int(data, position, "width")
    height, position = _read_header_int(data, position, "height")
    maxval, position = _read_header_int(data, position, "maxval")
    if width < 1 or height < 1:
        raise FormatParseError(f"image must be at least 1x1, got {width}x{height}", offset=position)
    if not 1 <= maxval <= MAX_MAXVAL:
        raise FormatParseError(f"maxval must be in [1, 255], got {maxval}", offset=position)
    if position >= len(data) or data[position : position + 1] not in WHITESPACE:
        raise FormatParseError("expected one whitespace byte before the raster", offset=position)
    raster_start = position + 1
    raster_end = raster_start + width * height
    if raster_end > len(data):
        raise FormatParseError(f"raster truncated: expected {width * height} bytes, found {len(data) - raster_start}", offset=len(data))
    if raster_end < len(data):
        raise FormatParseError(f"{len(data) - raster_end} trailing bytes after the raster", offset=raster_end)
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=raster_start)
    return GrayImage(raster.astype(np.float64).reshape(height, width))


def write_pgm(image: GrayImage) -> bytes:
    """Serialize as ``P5\\n<w> <h>\\n255\\n`` plus the rounded raster."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + quantize(image.pixels).astype(np.uint8).tobytes()


def load_pgm(path: Path) -> GrayImage:
    """Read a PGM file from disk."""
    return read_pgm(Path(path).read_bytes())


def save_pgm(path: Path, image: GrayImage) -> None:
    """Write a canonical PGM file, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(write_pgm(image))
