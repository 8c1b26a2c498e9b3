"""Per-pixel weight maps for weighted normalized correlation.

Generated maps are clamped below at 1 so that the background of a Gaussian or
exponential map weighs the same as the uniform baseline. The amplitude ``A`` is the
upper bound of every generated weight.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .core import Point, Template, geometric_center

WeightMapKind = Literal["uniform", "gaussian", "exponential", "custom"]
PRESET_NAMES: tuple[str, ...] = ("uniform", "gauss-ellipse", "gauss-circle", "exp")


@dataclass(frozen=True, slots=True)
class GaussianParams:
    """Amplitude, spreads, and optional center of the two-sigma Gaussian."""

    amplitude: float = 5.0
    sigma_x: float = 16.0
    sigma_y: float = 8.0
    x0: float | None = None
    y0: float | None = None

    def __post_init__(self) -> None:
        """Reject amplitudes below 1 and non-positive spreads."""
        if not self.amplitude >= 1.0:
            raise ValueError(f"gaussian amplitude must be >= 1, got {self.amplitude}")
        if not self.sigma_x > 0.0 or not self.sigma_y > 0.0:
            raise ValueError(f"gaussian sigmas must be > 0, got sigma_x={self.sigma_x}, sigma_y={self.sigma_y}")


@dataclass(frozen=True, slots=True)
class ExponentialParams:
    """Amplitude, decay lengths, optional center, and formula selection.

    ``literal_form`` evaluates ``A * exp(-|dx / b + dy / c|)``, a ridge along the
    anti-diagonal. The default evaluates ``A * exp(-(|dx| / b + |dy| / c))``, which
    peaks at the center like the published mask.
    """

    amplitude: float = 5.0
    b: float = 10.0
    c: float = 10.0
    x0: float | None = None
    y0: float | None = None
    literal_form: bool = False

    def __post_init__(self) -> None:
        """Reject amplitudes below 1 and non-positive decay lengths."""
        if not self.amplitude >= 1.0:
            raise ValueError(f"exponential amplitude must be >= 1, got {self.amplitude}")
        if not self.b > 0.0 or not self.c > 0.0:
            raise ValueError(f"exponential decay lengths must be > 0, got b={self.b}, c={self.c}")


WeightParams = GaussianParams | ExponentialParams | None


@dataclass(frozen=True, slots=True, eq=False)
class WeightMap:
    """Row-major positive weights with the dimensions of one template."""

    weights: np.ndarray
    kind: WeightMapKind
    params: WeightParams = None

    def __post_init__(self) -> None:
        """Validate and freeze an owned float64 copy."""
        array = np.array(self.weights, dtype=np.float64, copy=True)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"weights must be a non-empty two-dimensional array, got shape {array.shape}")
        if not np.all(np.isfinite(array)) or not np.all(array > 0.0):
            raise ValueError("every weight must be finite and greater than 0")
        array.setflags(write=False)
        object.__setattr__(self, "weights", array)

    @property
    def width(self) -> int:
        """Map columns."""
        return int(self.weights.shape[1])

    @property
    def height(self) -> int:
        """Map rows."""
        return int(self.weights.shape[0])

    @property
    def values(self) -> np.ndarray:
        """Row-major flat weights."""
        return self.weights.ravel()


@dataclass(frozen=True, slots=True)
class WeightMapSetting:
    """A named generator configuration, applied per template by ``map_for_template``."""

    name: str
    kind: WeightMapKind
    params: WeightParams = None


def _check_dimensions(width: int, height: int) -> None:
    if width < 1 or height < 1:
        raise ValueError(f"weight map dimensions must be at least 1x1, got {width}x{height}")


def _offsets(width: int, height: int, x0: float | None, y0: float | None) -> tuple[np.ndarray, np.ndarray]:
    center = geometric_center(width, height)
    cx = center.x if x0 is None else x0
    cy = center.y if y0 is None else y0
    dx = np.arange(width, dtype=np.float64)[np.newaxis, :] - cx
    dy = np.arange(height, dtype=np.float64)[:, np.newaxis] - cy
    return dx, dy


def uniform_map(width: int, height: int) -> WeightMap:
    """Return a map whose every weight is exactly 1."""
    _check_dimensions(width, height)
    return WeightMap(np.ones((height, width), dtype=np.float64), kind="uniform")


def gaussian_map(width: int, height: int, params: GaussianParams) -> WeightMap:
    """Evaluate ``max(1, A * exp(-(dx^2 / 2 sx^2 + dy^2 / 2 sy^2)))`` at pixel coordinates."""
    _check_dimensions(width, height)
    dx, dy = _offsets(width, height, params.x0, params.y0)
    exponent = dx**2 / (2.0 * params.sigma_x**2) + dy**2 / (2.0 * params.sigma_y**2)
    weights = np.maximum(1.0, params.amplitude * np.exp(-exponent))
    return WeightMap(weights, kind="gaussian", params=params)


def exponential_map(width: int, height: int, params: ExponentialParams) -> WeightMap:
    """Evaluate the exponential map in the separable or the literal ridge form."""
    _check_dimensions(width, height)
    dx, dy = _offsets(width, height, params.x0, params.y0)
    if params.literal_form:
        exponent = np.abs(dx / params.b + dy / params.c)
    else:
        exponent = np.abs(dx) / params.b + np.abs(dy) / params.c
    weights = np.maximum(1.0, params.amplitude * np.exp(-exponent))
    return WeightMap(weights, kind="exponential", params=params)


def weight_map_from_array(weights: np.ndarray) -> WeightMap:
    """Wrap externally supplied weights, e.g. a map read from disk."""
    return WeightMap(weights, kind="custom")


def build_map(width: int, height: int, kind: WeightMapKind, params: WeightParams = None) -> WeightMap:
    """Dispatch to the generator for ``kind``."""
    if kind == "uniform":
        return uniform_map(width, height)
    if kind == "gaussian":
        if not isinstance(params, GaussianParams):
            raise ValueError("gaussian maps require GaussianParams")
        return gaussian_map(width, height, params)
    if kind == "exponential":
        if not isinstance(params, ExponentialParams):
            raise ValueError("exponential maps require ExponentialParams")
        return exponential_map(width, height, params)
    raise ValueError(f"cannot generate a weight map of kind {kind!r}")


def _centered_on(params: WeightParams, anchor: Point) -> WeightParams:
    if params is None:
        return None
    return replace(params, x0=anchor.x, y0=anchor.y)


def map_for_template(template: Template, kind: WeightMapKind, params: WeightParams = None) -> WeightMap:
    """Build a map with the template's dimensions, centered on its anchor.

    Parameters keep their amplitude and spreads for every template size; only the
    center follows the template.
    """
    return build_map(template.width, template.height, kind, _centered_on(params, template.anchor))


def map_for_setting(template: Template, setting: WeightMapSetting) -> WeightMap:
    """Apply a named setting to one template."""
    return map_for_template(template, setting.kind, setting.params)


def preset_settings(
    *,
    amplitude: float = 5.0,
    sigma_x: float = 16.0,
    sigma_y: float = 8.0,
    circle_sigma: float = 8.0,
    b: float = 10.0,
    c: float = 10.0,
    literal_abs_sum: bool = False,
) -> dict[str, WeightMapSetting]:
    """Return the four experimental maps keyed by their command-line names."""
    return {
        "uniform": WeightMapSetting("uniform", "uniform"),
        "gauss-ellipse": WeightMapSetting("gauss-ellipse", "gaussian", GaussianParams(amplitude, sigma_x, sigma_y)),
        "gauss-circle": WeightMapSetting("gauss-circle", "gaussian", GaussianParams(amplitude, circle_sigma, circle_sigma)),
        "exp": WeightMapSetting("exp", "exponential", ExponentialParams(amplitude, b, c, literal_form=literal_abs_sum)),
    }


def select_settings(names: tuple[str, ...] | list[str], presets: Mapping[str, WeightMapSetting]) -> tuple[WeightMapSetting, ...]:
    """Resolve preset names in order, rejecting unknown ones."""
    selected: list[WeightMapSetting] = []
    for name in names:
        setting = presets.get(name)
        if setting is None:
            raise ValueError(f"unknown weight map {name!r}; expected one of {', '.join(presets)}")
        selected.append(setting)
    return tuple(selected)
