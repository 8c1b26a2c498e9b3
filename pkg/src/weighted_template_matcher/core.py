"""Shared raster types, points, and patch extraction.

Coordinates follow the PGM raster: origin at the top-left pixel, ``x`` grows to the
right and ``y`` grows downward. Intensities stay on the 8-bit scale ``[0, 255]`` as
float64 values; no normalization is applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

EyeLabel = Literal["right", "left"]
EYE_LABELS: tuple[EyeLabel, ...] = ("right", "left")
MAX_INTENSITY = 255.0
VARIANCE_EPSILON = 1e-12


class WindowRangeError(IndexError):
    """Raised when a requested window does not lie fully inside an image."""


class DegenerateWindowError(ValueError):
    """Raised when a window has variance below ``VARIANCE_EPSILON``."""


class DegenerateTemplateError(DegenerateWindowError):
    """Raised when a template has no usable intensity variation."""


class NoValidWindowError(RuntimeError):
    """Raised when every candidate window of a search was skipped."""


class PlacementError(ValueError):
    """Raised when synthetic scene geometry cannot be placed inside the image."""


class FormatParseError(ValueError):
    """Raised by file-format readers; carries the byte offset or 1-based line."""

    def __init__(self, message: str, *, offset: int | None = None, line: int | None = None) -> None:
        """Attach the failing location to the message."""
        location = ""
        if offset is not None:
            location = f" at byte {offset}"
        elif line is not None:
            location = f" at line {line}"
        super().__init__(f"{message}{location}")
        self.offset = offset
        self.line = line


@dataclass(frozen=True, slots=True)
class PixelPoint:
    """Integer pixel coordinate."""

    x: int
    y: int


@dataclass(frozen=True, slots=True)
class Point:
    """Continuous coordinate; half-integer values occur for even-sized templates."""

    x: float
    y: float


@dataclass(frozen=True, slots=True)
class Region:
    """Integer rectangle ``[x, x + width) x [y, y + height)``."""

    x: int
    y: int
    width: int
    height: int

    def __post_init__(self) -> None:
        """Reject negative origins and empty rectangles."""
        if self.x < 0 or self.y < 0:
            raise ValueError(f"region origin must be non-negative, got ({self.x}, {self.y})")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"region size must be at least 1x1, got {self.width}x{self.height}")

    @classmethod
    def parse(cls, text: str) -> Region:
        """Parse the ``x,y,w,h`` form used on the command line."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"region must be x,y,w,h, got {text!r}")
        try:
            x, y, width, height = (int(part) for part in parts)
        except ValueError as exc:
            raise ValueError(f"region must contain integers, got {text!r}") from exc
        return cls(x, y, width, height)


def _readonly(array: np.ndarray) -> np.ndarray:
    owned = np.array(array, dtype=np.float64, copy=True)
    owned.setflags(write=False)
    return owned


@dataclass(frozen=True, slots=True, eq=False)
class GrayImage:
    """Immutable grayscale raster held as a ``(height, width)`` float64 array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        """Validate shape and intensity range, then freeze an owned copy."""
        array = np.asarray(self.pixels, dtype=np.float64)
        if array.ndim != 2:
            raise ValueError(f"image pixels must be two-dimensional, got shape {array.shape}")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got {array.shape[1]}x{array.shape[0]}")
        if not np.all(np.isfinite(array)):
            raise ValueError("image intensities must be finite")
        if array.min() < 0.0 or array.max() > MAX_INTENSITY:
            raise ValueError(f"image intensities must lie in [0, 255], got [{array.min()}, {array.max()}]")
        object.__setattr__(self, "pixels", _readonly(array))

    @classmethod
    def from_flat(cls, width: int, height: int, values: object) -> GrayImage:
        """Build an image from row-major intensities."""
        flat = np.asarray(values, dtype=np.float64).ravel()
        if width < 1 or height < 1:
            raise ValueError(f"image must be at least 1x1, got {width}x{height}")
        if flat.size != width * height:
            raise ValueError(f"expected {width * height} intensities for {width}x{height}, got {flat.size}")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        """Pixel columns."""
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        """Pixel rows."""
        return int(self.pixels.shape[0])

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view of the raster."""
        return self.pixels.ravel()

    def crop(self, region: Region) -> GrayImage:
        """Return the sub-image covered by ``region``."""
        check_window(self, PixelPoint(region.x, region.y), region.width, region.height)
        return GrayImage(self.pixels[region.y : region.y + region.height, region.x : region.x + region.width])


def geometric_center(width: int, height: int) -> Point:
    """Return the continuous center ``((width - 1) / 2, (height - 1) / 2)``."""
    return Point((width - 1) / 2.0, (height - 1) / 2.0)


@dataclass(frozen=True, slots=True, eq=False)
class Template:
    """Eye template: a patch, its eye-center anchor, side label, and ordering id."""

    image: GrayImage
    anchor: Point
    label: EyeLabel
    id: int

    def __post_init__(self) -> None:
        """Keep the anchor inside the template and the label known."""
        if self.label not in EYE_LABELS:
            raise ValueError(f"template label must be one of {EYE_LABELS}, got {self.label!r}")
        if not (0.0 <= self.anchor.x < self.image.width and 0.0 <= self.anchor.y < self.image.height):
            raise ValueError(
                f"template anchor ({self.anchor.x}, {self.anchor.y}) lies outside the {self.image.width}x{self.image.height} template",
            )

    @classmethod
    def centered(cls, image: GrayImage, label: EyeLabel, template_id: int) -> Template:
        """Create a template anchored at its geometric center."""
        return cls(image=image, anchor=geometric_center(image.width, image.height), label=label, id=template_id)

    @property
    def width(self) -> int:
        """Template columns."""
        return self.image.width

    @property
    def height(self) -> int:
        """Template rows."""
        return self.image.height


@dataclass(frozen=True, slots=True, eq=False)
class Patch:
    """Flat row-major intensities of one window.

    Construction accepts any non-empty window; correlation requires ``n >= 2``
    and rejects smaller patches itself.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        """Freeze an owned one-dimensional copy."""
        flat = np.asarray(self.values, dtype=np.float64).ravel()
        if flat.size < 1:
            raise ValueError("patch must contain at least one intensity")
        object.__setattr__(self, "values", _readonly(flat))

    @property
    def n(self) -> int:
        """Pixel count."""
        return int(self.values.size)


def check_window(image: GrayImage, top_left: PixelPoint, width: int, height: int) -> None:
    """Raise ``WindowRangeError`` unless the window lies fully inside ``image``."""
    if width < 1 or height < 1:
        raise ValueError(f"window size must be at least 1x1, got {width}x{height}")
    if top_left.x < 0 or top_left.x + width > image.width:
        raise WindowRangeError(f"window x range [{top_left.x}, {top_left.x + width}) exceeds image width {image.width}")
    if top_left.y < 0 or top_left.y + height > image.height:
        raise WindowRangeError(f"window y range [{top_left.y}, {top_left.y + height}) exceeds image height {image.height}")


def extract_patch(image: GrayImage, top_left: PixelPoint, width: int, height: int) -> Patch:
    """Return the ``width * height`` intensities of a window in row-major order.

    Raises:
        WindowRangeError: The window leaves the image; the message names the axis range.
    """
    check_window(image, top_left, width, height)
    return Patch(image.pixels[top_left.y : top_left.y + height, top_left.x : top_left.x + width])


def variance(values: np.ndarray) -> float:
    """Population variance computed from deviations, exact zero for constant input."""
    return float(np.var(values))


def is_degenerate(values: np.ndarray) -> bool:
    """Return whether correlation against ``values`` is undefined."""
    return variance(values) < VARIANCE_EPSILON


def quantize(values: np.ndarray) -> np.ndarray:
    """Round half up to integer intensities and clamp to [0, 255]."""
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0.0, MAX_INTENSITY)
