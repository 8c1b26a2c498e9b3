"""Render score or weight fields as grayscale images."""

from __future__ import annotations

import numpy as np

from ..core import MAX_INTENSITY, GrayImage

CONSTANT_LEVEL = 128.0


def write_heatmap(scores: np.ndarray) -> GrayImage:
    """Rescale finite values affinely to [0, 255]; NaN and infinite entries become 0.

    A field whose finite values are all equal becomes uniformly 128.
    """
    field = np.asarray(scores, dtype=np.float64)
    if field.ndim != 2:
        raise ValueError(f"heatmap input must be two-dimensional, got shape {field.shape}")
    finite = np.isfinite(field)
    pixels = np.zeros(field.shape, dtype=np.float64)
    if not finite.any():
        return GrayImage(pixels)
    low = float(field[finite].min())
    high = float(field[finite].max())
    if high == low:
        pixels[finite] = CONSTANT_LEVEL
    else:
        pixels[finite] = (field[finite] - low) / (high - low) * MAX_INTENSITY
    return GrayImage(np.clip(pixels, 0.0, MAX_INTENSITY))
