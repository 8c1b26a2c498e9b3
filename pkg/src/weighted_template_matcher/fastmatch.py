"""Sliding-window weighted correlation from precomputed window sums.

The numerator of the weighted coefficient expands to
``sum(W X Y) - mean(Y) sum(W X) - mean(X) sum(W Y) + mean(X) mean(Y) sum(W)`` and
the image-side energy to ``sum(W Y^2) - 2 mean(Y) sum(W Y) + mean(Y)^2 sum(W)``.
Template factors are computed once. ``mean(Y)`` comes from a summed-area table. The
weighted window sums come from direct accumulation over a strided window view,
because an arbitrary weight map cannot be reduced to box sums.

All image-side tables are built from the region minus its global mean; every
expression above is invariant to that shift, and it keeps prefix sums small.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import VARIANCE_EPSILON, DegenerateTemplateError, GrayImage, Region, Template, is_degenerate
from .matcher import MatchResult, check_search, result_from_surface
from .weightmaps import WeightMap
from .workers import map_ordered

logger = logging.getLogger(__name__)

# Fixed so that banded and single-threaded runs perform identical arithmetic.
BAND_ROWS = 16
# Windows whose table variance falls below this are re-checked exactly.
CANDIDATE_VARIANCE = 1e-6


@dataclass(frozen=True, slots=True, eq=False)
class TemplateStats:
    """Template-side constants of the weighted coefficient."""

    sum_w: float
    sum_wx: float
    sum_wxx: float
    mean_x: float
    template_ss: float
    weights: np.ndarray
    coefficients: np.ndarray

    @property
    def sum_coefficients(self) -> float:
        """``sum(W (X - mean(X)))``; zero only for uniform weights."""
        return float(np.sum(self.coefficients))


@dataclass(frozen=True, slots=True, eq=False)
class SlidingSums:
    """Per-placement sums of the offset-centred region ``Y - offset``.

    Every table has shape ``(region_h - tpl_h + 1, region_w - tpl_w + 1)``.
    """

    offset: float
    n: int
    sum_y: np.ndarray
    sum_yy: np.ndarray
    sum_wy: np.ndarray
    sum_wyy: np.ndarray

    @property
    def mean_y(self) -> np.ndarray:
        """Window means on the original intensity scale."""
        return self.sum_y / self.n + self.offset

    @property
    def variance(self) -> np.ndarray:
        """Unweighted window variance from the box sums; approximate near zero."""
        centred_mean = self.sum_y / self.n
        return self.sum_yy / self.n - centred_mean * centred_mean


def precompute_template(template: Template, weight_map: WeightMap) -> TemplateStats:
    """Compute the template factors once per (template, map) pair.

    Raises:
        ValueError: Map and template dimensions differ.
        DegenerateTemplateError: The weighted template energy is below 1e-12.
    """
    if weight_map.width != template.width or weight_map.height != template.height:
        raise ValueError(
            f"weight map is {weight_map.width}x{weight_map.height} but template is {template.width}x{template.height}",
        )
    X = template.image.pixels
    W = weight_map.weights
    mean_x = float(X.mean())
    deviations = X - mean_x
    template_ss = float(np.sum(W * (deviations * deviations)))
    if template_ss < VARIANCE_EPSILON:
        raise DegenerateTemplateError(f"template {template.id} has zero weighted variance")
    coefficients = W * deviations
    coefficients.setflags(write=False)
    return TemplateStats(
        sum_w=float(np.sum(W)),
        sum_wx=float(np.sum(W * X)),
        sum_wxx=float(np.sum(W * (X * X))),
        mean_x=mean_x,
        template_ss=template_ss,
        weights=W,
        coefficients=coefficients,
    )


def summed_area_table(values: np.ndarray) -> np.ndarray:
    """Inclusive 2-D prefix sums with a leading row and column of zeros."""
    table = np.zeros((values.shape[0] + 1, values.shape[1] + 1), dtype=np.float64)
    table[1:, 1:] = np.cumsum(np.cumsum(values, axis=0, dtype=np.float64), axis=1)
    return table


def box_sums(table: np.ndarray, height: int, width: int) -> np.ndarray:
    """Sum of every ``height x width`` window, indexed by top-left corner."""
    return table[height:, width:] - table[:-height, width:] - table[height:, :-width] + table[:-height, :-width]


def _band_bounds(rows: int) -> list[tuple[int, int]]:
    return [(start, min(start + BAND_ROWS, rows)) for start in range(0, rows, BAND_ROWS)]


def _accumulate(source: np.ndarray, kernel: np.ndarray, rows: int, threads: int | None) -> np.ndarray:
    """``sum(kernel * window)`` for every placement, computed band by band."""
    height, width = kernel.shape

    def band(bounds: tuple[int, int]) -> np.ndarray:
        start, stop = bounds
        windows = sliding_window_view(source[start : stop + height - 1], (height, width))
        return np.einsum("ijkl,kl->ij", windows, kernel)

    return np.concatenate(map_ordered(band, _band_bounds(rows), threads=threads, message="window bands"), axis=0)


def _region_pixels(image: GrayImage, region: Region) -> np.ndarray:
    return image.pixels[region.y : region.y + region.height, region.x : region.x + region.width]


def sliding_sums(
    image: GrayImage,
    template: Template,
    weight_map: WeightMap,
    region: Region | None = None,
    *,
    threads: int | None = 1,
) -> SlidingSums:
    """Build the image-side window tables for one template shape and map."""
    region = check_search(image, template, weight_map, region)
    return _sliding_sums(_region_pixels(image, region), weight_map.weights, threads)


def _sliding_sums(pixels: np.ndarray, weights: np.ndarray, threads: int | None) -> SlidingSums:
    height, width = weights.shape
    offset = float(pixels.mean())
    centred = pixels - offset
    squared = centred * centred
    rows = pixels.shape[0] - height + 1
    return SlidingSums(
        offset=offset,
        n=height * width,
        sum_y=box_sums(summed_area_table(centred), height, width),
        sum_yy=box_sums(summed_area_table(squared), height, width),
        sum_wy=_accumulate(centred, weights, rows, threads),
        sum_wyy=_accumulate(squared, weights, rows, threads),
    )


def degenerate_mask(pixels: np.ndarray, sums: SlidingSums, height: int, width: int) -> np.ndarray:
    """Flag windows the naive matcher would skip.

    Box-sum variances carry rounding error far above 1e-12, so they only nominate
    candidates; each candidate is decided by the exact deviation-based variance.
    """
    mask = np.zeros(sums.sum_y.shape, dtype=bool)
    for y, x in np.argwhere(sums.variance < CANDIDATE_VARIANCE):
        window = pixels[y : y + height, x : x + width]
        mask[y, x] = is_degenerate(window.ravel())
    return mask


def score_surface(
    image: GrayImage,
    template: Template,
    weight_map: WeightMap,
    region: Region | None = None,
    *,
    threads: int | None = 1,
) -> np.ndarray:
    """Same table as ``matcher.score_surface``, from window sums."""
    region = check_search(image, template, weight_map, region)
    stats = precompute_template(template, weight_map)
    pixels = _region_pixels(image, region)
    sums = _sliding_sums(pixels, stats.weights, threads)
    centred = pixels - sums.offset
    cross = _accumulate(centred, stats.coefficients, sums.sum_y.shape[0], threads)

    centred_mean = sums.sum_y / sums.n
    numerator = cross - centred_mean * stats.sum_coefficients
    image_ss = sums.sum_wyy - 2.0 * centred_mean * sums.sum_wy + centred_mean * centred_mean * stats.sum_w
    image_ss = np.maximum(image_ss, 0.0)
    degenerate = degenerate_mask(pixels, sums, template.height, template.width)
    with np.errstate(divide="ignore", invalid="ignore"):
        surface = numerator / (np.sqrt(stats.template_ss) * np.sqrt(image_ss))
    surface[degenerate] = np.nan
    return surface


def fast_match(
    image: GrayImage,
    template: Template,
    weight_map: WeightMap,
    region: Region | None = None,
    *,
    threads: int | None = 1,
) -> MatchResult:
    """Drop-in replacement for ``matcher.match_template``.

    Raises:
        ValueError: The template or map does not fit.
        DegenerateTemplateError: The template itself is constant.
        NoValidWindowError: Every window is degenerate.
    """
    effective = check_search(image, template, weight_map, region)
    surface = score_surface(image, template, weight_map, effective, threads=threads)
    return result_from_surface(surface, template, effective)
