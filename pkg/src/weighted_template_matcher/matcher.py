"""Reference correlation scores and exhaustive sliding-window search.

Everything here evaluates the correlation formulas directly, one window at a time,
and serves as the oracle for ``fastmatch``.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateTemplateError,
    DegenerateWindowError,
    GrayImage,
    NoValidWindowError,
    Patch,
    PixelPoint,
    Point,
    Region,
    Template,
    check_window,
    is_degenerate,
)
from .weightmaps import WeightMap

logger = logging.getLogger(__name__)

MatchScore = float

# Scores closer than this (relative, at least absolute) to the best count as ties.
TIE_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True)
class MatchResult:
    """Best window of one search: position, detected center, score, and template."""

    top_left: PixelPoint
    center: Point
    score: MatchScore
    template_id: int

    def sort_key(self) -> tuple[float, int, int, int]:
        """Order by descending score, then template id, then row, then column."""
        return (-self.score, self.template_id, self.top_left.y, self.top_left.x)


Matcher = Callable[..., MatchResult]


def _check_pair(X: Patch, Y: Patch) -> None:
    if X.n != Y.n:
        raise ValueError(f"patch lengths differ: {X.n} != {Y.n}")
    if X.n < 2:
        raise ValueError(f"correlation needs at least 2 pixels, got {X.n}")
    if is_degenerate(X.values):
        raise DegenerateWindowError("first patch has zero variance")
    if is_degenerate(Y.values):
        raise DegenerateWindowError("second patch has zero variance")


def _correlate(dx: np.ndarray, dy: np.ndarray, weights: np.ndarray) -> float:
    # Products are formed as weights * (a * b) so that swapping X and Y is exact.
    numerator = float(np.sum(weights * (dx * dy)))
    x_energy = float(np.sum(weights * (dx * dx)))
    y_energy = float(np.sum(weights * (dy * dy)))
    return numerator / (np.sqrt(x_energy) * np.sqrt(y_energy))


def ncc(X: Patch, Y: Patch) -> MatchScore:
    """Normalized correlation coefficient of two equally sized patches.

    Raises:
        ValueError: Lengths differ or fewer than two pixels.
        DegenerateWindowError: Either patch has variance below 1e-12.
    """
    _check_pair(X, Y)
    dx = X.values - X.values.mean()
    dy = Y.values - Y.values.mean()
    return _correlate(dx, dy, np.ones_like(dx))


def weighted_ncc(X: Patch, Y: Patch, W: WeightMap) -> MatchScore:
    """Weighted correlation coefficient with unweighted means.

    Every deviation product is multiplied by its pixel weight; the means are the
    plain patch means, so all-ones weights reproduce ``ncc`` exactly.

    Raises:
        ValueError: Lengths differ, fewer than two pixels, or a weight count mismatch.
        DegenerateWindowError: Either patch has variance below 1e-12.
    """
    _check_pair(X, Y)
    weights = W.values
    if weights.size != X.n:
        raise ValueError(f"weight map has {weights.size} weights for {X.n} pixels")
    if not np.all(weights > 0.0):
        raise ValueError("weights must be greater than 0")
    dx = X.values - X.values.mean()
    dy = Y.values - Y.values.mean()
    return _correlate(dx, dy, weights)


def check_search(image: GrayImage, template: Template, weight_map: WeightMap, region: Region | None) -> Region:
    """Validate a search and return the effective region."""
    if weight_map.width != template.width or weight_map.height != template.height:
        raise ValueError(
            f"weight map is {weight_map.width}x{weight_map.height} but template is {template.width}x{template.height}",
        )
    if template.width > image.width or template.height > image.height:
        raise ValueError(f"template {template.width}x{template.height} is larger than image {image.width}x{image.height}")
    if template.width * template.height < 2:
        raise ValueError("template must contain at least 2 pixels")
    if region is None:
        region = Region(0, 0, image.width, image.height)
    check_window(image, PixelPoint(region.x, region.y), region.width, region.height)
    if template.width > region.width or template.height > region.height:
        raise ValueError(f"template {template.width}x{template.height} does not fit region {region.width}x{region.height}")
    if is_degenerate(template.image.values):
        raise DegenerateTemplateError(f"template {template.id} has zero variance")
    return region


def score_surface(image: GrayImage, template: Template, weight_map: WeightMap, region: Region | None = None) -> np.ndarray:
    """Score every placement inside the region; skipped windows hold NaN.

    Entry ``[y, x]`` belongs to the window whose top-left corner is
    ``(region.x + x, region.y + y)``.
    """
    region = check_search(image, template, weight_map, region)
    X = Patch(template.image.values)
    rows = region.height - template.height + 1
    cols = region.width - template.width + 1
    surface = np.full((rows, cols), np.nan, dtype=np.float64)
    pixels = image.pixels
    for y in range(rows):
        top = region.y + y
        for x in range(cols):
            left = region.x + x
            Y = Patch(pixels[top : top + template.height, left : left + template.width])
            try:
                surface[y, x] = weighted_ncc(X, Y, weight_map)
            except DegenerateWindowError:
                continue
    return surface


def tie_threshold(best: float) -> float:
    """Lowest score that still ties with ``best``."""
    return best - TIE_TOLERANCE * max(1.0, abs(best))


def best_window(surface: np.ndarray) -> tuple[int, int]:
    """Return ``(y, x)`` of the first window in row-major order that ties with the maximum.

    Scores within ``TIE_TOLERANCE`` of the maximum are ties.

    Raises:
        NoValidWindowError: Every entry of the surface is NaN.
    """
    valid = ~np.isnan(surface)
    if not valid.any():
        raise NoValidWindowError("every window is degenerate")
    tied = valid & (np.where(valid, surface, -np.inf) >= tie_threshold(float(np.nanmax(surface))))
    flat_index = int(np.flatnonzero(tied)[0])
    y, x = divmod(flat_index, surface.shape[1])
    return y, x


def result_from_surface(surface: np.ndarray, template: Template, region: Region) -> MatchResult:
    """Pick the first tied maximum in row-major order and convert it to image coordinates.

    Raises:
        NoValidWindowError: Every entry of the surface is NaN.
    """
    if np.all(np.isnan(surface)):
        raise NoValidWindowError(f"every window is degenerate for template {template.id}")
    y, x = best_window(surface)
    top_left = PixelPoint(region.x + x, region.y + y)
    center = Point(top_left.x + template.anchor.x, top_left.y + template.anchor.y)
    return MatchResult(top_left=top_left, center=center, score=float(surface[y, x]), template_id=template.id)


def match_template(image: GrayImage, template: Template, weight_map: WeightMap, region: Region | None = None) -> MatchResult:
    """Exhaustive search returning the highest-scoring window.

    Ties resolve to the smallest row, then the smallest column.

    Raises:
        ValueError: The template or map does not fit.
        DegenerateTemplateError: The template itself is constant.
        NoValidWindowError: Every window is degenerate.
    """
    effective = check_search(image, template, weight_map, region)
    surface = score_surface(image, template, weight_map, effective)
    return result_from_surface(surface, template, effective)


def select_best(results: Iterable[MatchResult]) -> MatchResult:
    """Reduce results by score, breaking ties on template id, row, then column.

    Scores within ``TIE_TOLERANCE`` of the best are ties.
    """
    ordered = sorted(results, key=MatchResult.sort_key)
    if not ordered:
        raise NoValidWindowError("no template produced a valid window")
    threshold = tie_threshold(ordered[0].score)
    tied = [result for result in ordered if result.score >= threshold]
    return min(tied, key=lambda result: (result.template_id, result.top_left.y, result.top_left.x))


def match_ensemble(
    image: GrayImage,
    templates: Sequence[tuple[Template, WeightMap]],
    *,
    region: Region | None = None,
    matcher: Matcher = match_template,
) -> MatchResult:
    """Run ``matcher`` for every template and keep the best result.

    A template whose windows are all degenerate is dropped from the vote.

    Raises:
        ValueError: The list is empty.
        NoValidWindowError: Every template failed.
    """
    if not templates:
        raise ValueError("match_ensemble needs at least one template")
    results: list[MatchResult] = []
    for template, weight_map in templates:
        try:
            results.append(matcher(image, template, weight_map, region))
        except (NoValidWindowError, DegenerateTemplateError) as exc:
            logger.debug("template %d produced no window: %s", template.id, exc)
    return select_best(results)
