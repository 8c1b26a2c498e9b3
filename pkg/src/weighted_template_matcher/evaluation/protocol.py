"""Detection-rate protocol over template counts and weight-map kinds.

For a count ``N`` the ensemble for one eye is the first ``N`` same-side templates by
ascending id. Each template is matched once per image and weight map; the ensembles
for all counts are then reduced from those shared results with ``select_best``, which
is exactly what ``match_ensemble`` would return for each prefix.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from ..core import EYE_LABELS, DegenerateTemplateError, EyeLabel, GrayImage, NoValidWindowError, PixelPoint, Point, Template
from ..fastmatch import fast_match
from ..matcher import Matcher, MatchResult, select_best
from ..synth import Annotation
from ..weightmaps import WeightMap, WeightMapSetting, map_for_setting, preset_settings
from ..workers import ProgressReporter, map_ordered
from .report import EvalReport, RateKey

logger = logging.getLogger(__name__)

DEFAULT_COUNTS: tuple[int, ...] = (10, 45, 80)
DEFAULT_THRESHOLD_PX = 8.0
BASELINE_KIND = "uniform"


def _default_kinds() -> tuple[WeightMapSetting, ...]:
    return tuple(preset_settings().values())


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """Template counts, detection radius, weight-map settings, and eyes to evaluate.

    A uniform setting is the delta baseline. When ``kinds`` holds none, one named
    ``uniform`` is prepended.
    """

    template_counts: tuple[int, ...] = DEFAULT_COUNTS
    threshold_px: float = DEFAULT_THRESHOLD_PX
    kinds: tuple[WeightMapSetting, ...] = field(default_factory=_default_kinds)
    eyes: tuple[EyeLabel, ...] = EYE_LABELS

    def __post_init__(self) -> None:
        """Validate ranges and make sure a uniform baseline is present."""
        counts = tuple(self.template_counts)
        if not counts:
            raise ValueError("template_counts must not be empty")
        if any(count < 1 for count in counts):
            raise ValueError(f"template counts must be positive, got {counts}")
        if len(set(counts)) != len(counts):
            raise ValueError(f"template counts must be unique, got {counts}")
        if not self.threshold_px > 0.0:
            raise ValueError(f"threshold_px must be > 0, got {self.threshold_px}")
        if not self.eyes or any(eye not in EYE_LABELS for eye in self.eyes):
            raise ValueError(f"eyes must be a non-empty subset of {EYE_LABELS}, got {self.eyes}")
        kinds = tuple(self.kinds)
        names = [setting.name for setting in kinds]
        if len(set(names)) != len(names):
            raise ValueError(f"weight map names must be unique, got {names}")
        if not any(setting.kind == "uniform" for setting in kinds):
            if BASELINE_KIND in names:
                raise ValueError(f"setting {BASELINE_KIND!r} must be of kind 'uniform'")
            kinds = (WeightMapSetting(BASELINE_KIND, "uniform"), *kinds)
        object.__setattr__(self, "template_counts", counts)
        object.__setattr__(self, "eyes", tuple(self.eyes))
        object.__setattr__(self, "kinds", kinds)

    @property
    def baseline(self) -> WeightMapSetting:
        """First uniform setting; deltas are measured against it."""
        return next(setting for setting in self.kinds if setting.kind == "uniform")

    @property
    def max_count(self) -> int:
        """Largest template count."""
        return max(self.template_counts)


@dataclass(frozen=True, slots=True, eq=False)
class EvalSample:
    """One test image with its ground truth."""

    image: GrayImage
    annotation: Annotation

    @property
    def image_id(self) -> str:
        """Identifier written to the match log."""
        return self.annotation.image_id


@dataclass(frozen=True, slots=True)
class MatchRecord:
    """Outcome for one (image, eye, kind, count); empty fields mean every template failed."""

    image_id: str
    eye: EyeLabel
    kind: str
    count: int
    template_id: int | None
    top_left: PixelPoint | None
    center: Point | None
    score: float
    error: float

    @property
    def detected(self) -> bool:
        """Whether the record has a window at all."""
        return self.template_id is not None


def detection_error(predicted: Point, truth: PixelPoint) -> float:
    """Euclidean distance in pixels."""
    return math.hypot(predicted.x - truth.x, predicted.y - truth.y)


def detection_rate(errors: Sequence[float], threshold: float) -> float:
    """Fraction of errors strictly below ``threshold``; infinite errors are misses.

    Raises:
        ValueError: ``errors`` is empty.
    """
    if not errors:
        raise ValueError("detection_rate needs at least one error")
    return sum(1 for error in errors if error < threshold) / len(errors)


def side_templates(templates: Sequence[Template], eye: EyeLabel, count: int) -> list[Template]:
    """First ``count`` templates of one side by ascending id.

    Raises:
        ValueError: Fewer than ``count`` templates exist for the side.
    """
    side = sorted((template for template in templates if template.label == eye), key=lambda template: template.id)
    if len(side) < count:
        raise ValueError(f"need {count} {eye}-eye templates, only {len(side)} available")
    return side[:count]


def _record(sample: EvalSample, eye: EyeLabel, kind: str, count: int, results: Sequence[MatchResult | None]) -> MatchRecord:
    found = [result for result in results[:count] if result is not None]
    if not found:
        return MatchRecord(sample.image_id, eye, kind, count, None, None, None, math.nan, math.inf)
    best = select_best(found)
    error = detection_error(best.center, sample.annotation.eye(eye))
    return MatchRecord(sample.image_id, eye, kind, count, best.template_id, best.top_left, best.center, best.score, error)


def _match_or_none(matcher: Matcher, image: GrayImage, template: Template, weight_map: WeightMap) -> MatchResult | None:
    try:
        return matcher(image, template, weight_map)
    except (NoValidWindowError, DegenerateTemplateError) as exc:
        logger.debug("template %d produced no window: %s", template.id, exc)
        return None


def run_experiment(
    samples: Sequence[EvalSample],
    templates: Sequence[Template],
    config: ExperimentConfig,
    *,
    threads: int | None = 1,
    progress: ProgressReporter | None = None,
    matcher: Matcher = fast_match,
) -> EvalReport:
    """Evaluate every (eye, kind, count) cell and assemble the report.

    Images are evaluated independently on the worker pool; the records come back in
    sample order, so the report does not depend on ``threads``.

    Raises:
        ValueError: No samples, or fewer templates for a side than the largest count.
    """
    if not samples:
        raise ValueError("run_experiment needs at least one sample")
    ensembles = {eye: side_templates(templates, eye, config.max_count) for eye in config.eyes}
    maps: dict[tuple[EyeLabel, str], list[tuple[Template, WeightMap]]] = {
        (eye, setting.name): [(template, map_for_setting(template, setting)) for template in ensembles[eye]]
        for eye in config.eyes
        for setting in config.kinds
    }

    def evaluate(sample: EvalSample) -> list[MatchRecord]:
        records: list[MatchRecord] = []
        for eye in config.eyes:
            for setting in config.kinds:
                results = [_match_or_none(matcher, sample.image, template, weight_map) for template, weight_map in maps[eye, setting.name]]
                records.extend(_record(sample, eye, setting.name, count, results) for count in config.template_counts)
        return records

    logger.info(
        "evaluating %d images, %d kinds, counts %s, threshold %g px",
        len(samples),
        len(config.kinds),
        ",".join(str(count) for count in config.template_counts),
        config.threshold_px,
    )
    per_image = map_ordered(evaluate, samples, threads=threads, progress=progress, message="images")
    records = [record for image_records in per_image for record in image_records]
    return build_report(records, config)


def build_report(records: Sequence[MatchRecord], config: ExperimentConfig) -> EvalReport:
    """Compute rates and baseline deltas from match records.

    Also recomputes a report from a match log read back from disk.

    Raises:
        ValueError: A configured (eye, kind, count) cell has no records.
    """
    errors: dict[RateKey, list[float]] = {}
    for record in records:
        errors.setdefault((record.eye, record.kind, record.count), []).append(record.error)
    rates: dict[RateKey, float] = {}
    for eye in config.eyes:
        for setting in config.kinds:
            for count in config.template_counts:
                key = (eye, setting.name, count)
                if key not in errors:
                    raise ValueError(f"no match records for eye={eye}, kind={setting.name}, count={count}")
                rates[key] = detection_rate(errors[key], config.threshold_px)
    baseline = config.baseline.name
    deltas = {key: rate - rates[key[0], baseline, key[2]] for key, rate in rates.items()}
    notes = (
        f"templates per count: first N per side by ascending id; detection: error < {config.threshold_px:g} px",
        f"deltas against {baseline}",
    )
    return EvalReport(
        rates=rates,
        deltas=deltas,
        eyes=config.eyes,
        kinds=tuple(setting.name for setting in config.kinds),
        counts=config.template_counts,
        baseline=baseline,
        threshold_px=config.threshold_px,
        records=tuple(records),
        notes=notes,
    )
