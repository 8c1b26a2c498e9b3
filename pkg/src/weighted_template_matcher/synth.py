"""Deterministic synthetic eye scenes with exact ground truth.

Randomness comes only from numpy's PCG64 bit generator, seeded explicitly. PCG64 is
a 128-bit permuted congruential generator with a published algorithm and a stable
output stream across platforms and numpy releases. Gaussian noise is produced with
the Box-Muller transform from its uniform doubles, so a corpus is a pure function
of ``(seed, params)``.

The subject's right eye is drawn on the image's left side, as in a frontal photograph.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Final

import numpy as np

from .core import (
    EYE_LABELS,
    MAX_INTENSITY,
    EyeLabel,
    GrayImage,
    PixelPoint,
    PlacementError,
    Point,
    Template,
    check_window,
    extract_patch,
    quantize,
)
from .workers import ProgressReporter, map_ordered

logger = logging.getLogger(__name__)

STREAM_TEST: Final = 0
STREAM_TRAIN: Final = 1
STREAM_TEMPLATE_JITTER: Final = 2
MIN_CONTRAST = 60.0
RIGHT_EYE_X = 0.3
LEFT_EYE_X = 0.7
EYE_Y = 0.5


@dataclass(frozen=True, slots=True)
class SceneParams:
    """Geometry, intensities, noise, and seed of one scene."""

    image_w: int = 128
    image_h: int = 96
    iris_radius: float = 5.0
    eye_rx: float = 16.0
    eye_ry: float = 7.0
    noise_sigma: float = 12.75
    background_level: float = 110.0
    sclera_contrast: float = 80.0
    iris_contrast: float = 80.0
    placement_jitter: int = 6
    brow_gap: int = 1
    brow_jitter: int = 3
    brow_thickness: int = 2
    # Horizontal iris offset of the left eye; keeps the two eye windows distinct.
    left_gaze_shift: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate ranges that do not depend on the random placement."""
        if self.image_w < 1 or self.image_h < 1:
            raise ValueError(f"scene must be at least 1x1, got {self.image_w}x{self.image_h}")
        if not 0.0 < self.iris_radius < min(self.eye_rx, self.eye_ry):
            raise ValueError(f"iris_radius must be in (0, min(eye_rx, eye_ry)), got {self.iris_radius}")
        if abs(self.left_gaze_shift) + self.iris_radius >= self.eye_rx:
            raise ValueError(f"left_gaze_shift {self.left_gaze_shift} pushes the iris out of the sclera")
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.sclera_contrast < MIN_CONTRAST or self.iris_contrast < MIN_CONTRAST:
            raise ValueError(f"sclera and iris contrast must be >= {MIN_CONTRAST:g}")
        if self.sclera_level > MAX_INTENSITY or self.iris_level < 0.0:
            raise ValueError(
                f"background_level {self.background_level:g} leaves no room for the sclera ({self.sclera_level:g}) or iris ({self.iris_level:g}) levels",
            )
        if self.placement_jitter < 0 or self.brow_gap < 0 or self.brow_jitter < 0 or self.brow_thickness < 0:
            raise ValueError("jitter, gap, and thickness values must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def sclera_level(self) -> float:
        """Bright eye-white intensity."""
        return self.background_level + self.sclera_contrast

    @property
    def iris_level(self) -> float:
        """Dark iris intensity; also used for the eyebrow."""
        return self.background_level - self.iris_contrast


@dataclass(frozen=True, slots=True)
class Annotation:
    """Ground-truth eye centers of one image."""

    image_id: str
    right_eye: PixelPoint
    left_eye: PixelPoint

    def eye(self, label: EyeLabel) -> PixelPoint:
        """Return the center for one side."""
        return self.right_eye if label == "right" else self.left_eye


@dataclass(frozen=True, slots=True, eq=False)
class Scene:
    """Rendered scene: noisy image, its noise-free source, and ground truth."""

    image: GrayImage
    clean: GrayImage
    annotation: Annotation


@dataclass(frozen=True, slots=True, eq=False)
class SyntheticCorpus:
    """Test scenes plus templates cut from separate training scenes."""

    scenes: list[Scene] = field(default_factory=list)
    templates: list[Template] = field(default_factory=list)


def derive_seed(seed: int, stream: int, index: int) -> int:
    """Child seed for one item of one stream."""
    return int(np.random.SeedSequence([seed, stream, index]).generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Explicit PCG64 generator; never seeded from the clock."""
    return np.random.Generator(np.random.PCG64(seed))


def noise_field(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """Standard-normal samples via Box-Muller, filled row-major."""
    count = shape[0] * shape[1]
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * math.pi * u2
    samples = np.empty(pairs * 2, dtype=np.float64)
    samples[0::2] = radius * np.cos(angle)
    samples[1::2] = radius * np.sin(angle)
    return samples[:count].reshape(shape)


def _jitter(rng: np.random.Generator, limit: int) -> int:
    if limit == 0:
        return 0
    return int(rng.integers(-limit, limit, endpoint=True))


def _check_eye(params: SceneParams, center: PixelPoint, brow_top: int) -> None:
    if center.x - params.eye_rx < 0 or center.x + params.eye_rx > params.image_w - 1:
        raise PlacementError(f"eye at x={center.x} with radius {params.eye_rx:g} leaves the {params.image_w}px wide image")
    if center.y + params.eye_ry > params.image_h - 1 or min(center.y - params.eye_ry, brow_top) < 0:
        raise PlacementError(f"eye at y={center.y} with its brow leaves the {params.image_h}px high image")


def _draw_eye(canvas: np.ndarray, params: SceneParams, center: PixelPoint, brow_bottom: int, gaze_shift: int = 0) -> None:
    ys, xs = np.mgrid[0 : params.image_h, 0 : params.image_w]
    dx = xs - center.x
    dy = ys - center.y
    sclera = (dx / params.eye_rx) ** 2 + (dy / params.eye_ry) ** 2 <= 1.0
    iris = (dx - gaze_shift) ** 2 + dy**2 <= params.iris_radius**2
    canvas[sclera] = params.sclera_level
    canvas[iris] = params.iris_level
    if params.brow_thickness:
        top = brow_bottom - params.brow_thickness + 1
        left = max(0, int(math.floor(center.x - params.eye_rx)))
        right = min(params.image_w, int(math.ceil(center.x + params.eye_rx)) + 1)
        canvas[top : brow_bottom + 1, left:right] = params.iris_level


def generate_scene(params: SceneParams, image_id: str = "scene") -> Scene:
    """Render two eyes with eyebrows on a flat background, then add noise.

    The left iris sits ``left_gaze_shift`` pixels right of its eye center, so a
    noise-free window around one eye never reappears around the other.

    Draw order from the generator is fixed: right-eye jitter (x, y), left-eye jitter
    (x, y), right and left brow gaps, then the noise field.

    Raises:
        PlacementError: The jittered eyes overlap or leave the image.
    """
    rng = make_rng(params.seed)
    base_y = int(round(params.image_h * EYE_Y))
    right = PixelPoint(int(round(params.image_w * RIGHT_EYE_X)) + _jitter(rng, params.placement_jitter), base_y + _jitter(rng, params.placement_jitter))
    left = PixelPoint(int(round(params.image_w * LEFT_EYE_X)) + _jitter(rng, params.placement_jitter), base_y + _jitter(rng, params.placement_jitter))
    gaps = [params.brow_gap + int(rng.integers(0, params.brow_jitter, endpoint=True)) for _ in range(2)]
    brows = [int(math.floor(eye.y - params.eye_ry)) - gap for eye, gap in zip((right, left), gaps)]

    for eye, brow_bottom in zip((right, left), brows):
        _check_eye(params, eye, brow_bottom - params.brow_thickness + 1)
    if left.x - right.x <= 2.0 * params.eye_rx:
        raise PlacementError(f"eyes at x={right.x} and x={left.x} overlap with radius {params.eye_rx:g}")

    canvas = np.full((params.image_h, params.image_w), params.background_level, dtype=np.float64)
    for eye, brow_bottom, gaze_shift in zip((right, left), brows, (0, params.left_gaze_shift)):
        _draw_eye(canvas, params, eye, brow_bottom, gaze_shift)
    clean = quantize(canvas)
    noisy = quantize(clean + params.noise_sigma * noise_field(rng, canvas.shape)) if params.noise_sigma > 0 else clean
    annotation = Annotation(image_id=image_id, right_eye=right, left_eye=left)
    return Scene(image=GrayImage(noisy), clean=GrayImage(clean), annotation=annotation)


def extract_template(
    image: GrayImage,
    center: PixelPoint,
    width: int,
    height: int,
    label: EyeLabel,
    *,
    template_id: int = 0,
    offset: PixelPoint | None = None,
) -> Template:
    """Cut a template whose anchor marks ``center`` in template coordinates.

    The window starts at ``center - (width // 2, height // 2)``, so a 44x22 cut around
    (50, 40) starts at (28, 29) and anchors at (22, 11). With ``offset`` the window
    moves while the anchor stays at ``(width // 2, height // 2)``, which models a
    labeller who mislocated the eye by that offset.

    Raises:
        ValueError: Fewer than two pixels.
        WindowRangeError: The window leaves the image.
    """
    if width * height < 2:
        raise ValueError(f"template must contain at least 2 pixels, got {width}x{height}")
    shift = offset or PixelPoint(0, 0)
    top_left = PixelPoint(center.x + shift.x - width // 2, center.y + shift.y - height // 2)
    check_window(image, top_left, width, height)
    patch = extract_patch(image, top_left, width, height)
    return Template(
        image=GrayImage(patch.values.reshape(height, width)),
        anchor=Point(float(width // 2), float(height // 2)),
        label=label,
        id=template_id,
    )


def _scene_for(params: SceneParams, seed: int, stream: int, index: int, prefix: str) -> Scene:
    scene_params = replace(params, seed=derive_seed(seed, stream, index))
    return generate_scene(scene_params, image_id=f"{prefix}_{index:04d}.pgm")


def build_corpus(
    *,
    count: int,
    train_count: int,
    seed: int,
    params: SceneParams | None = None,
    template_size: tuple[int, int] = (44, 22),
    template_jitter: int = 2,
    threads: int | None = 1,
    progress: ProgressReporter | None = None,
) -> SyntheticCorpus:
    """Generate test scenes and per-side templates from separate training scenes.

    Templates are numbered right-eye first (ids ``0 .. train_count - 1``), then
    left-eye, so filename order and id order agree.
    """
    if count < 0 or train_count < 0:
        raise ValueError("scene counts must be >= 0")
    if template_jitter < 0:
        raise ValueError(f"template_jitter must be >= 0, got {template_jitter}")
    params = params or SceneParams()
    width, height = template_size
    scenes = map_ordered(
        lambda index: _scene_for(params, seed, STREAM_TEST, index, "scene"),
        range(count),
        threads=threads,
        progress=progress,
        message="test scenes",
    )
    training = map_ordered(
        lambda index: _scene_for(params, seed, STREAM_TRAIN, index, "train"),
        range(train_count),
        threads=threads,
        progress=progress,
        message="training scenes",
    )
    templates: list[Template] = []
    for label_index, label in enumerate(EYE_LABELS):
        for index, scene in enumerate(training):
            rng = make_rng(derive_seed(seed, STREAM_TEMPLATE_JITTER, 2 * index + label_index))
            offset = PixelPoint(_jitter(rng, template_jitter), _jitter(rng, template_jitter))
            templates.append(
                extract_template(
                    scene.image,
                    scene.annotation.eye(label),
                    width,
                    height,
                    label,
                    template_id=len(templates),
                    offset=offset,
                ),
            )
    logger.info("synthesized %d test scenes and %d templates from seed %d", len(scenes), len(templates), seed)
    return SyntheticCorpus(scenes=scenes, templates=templates)
