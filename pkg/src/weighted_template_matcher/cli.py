"""Command-line entrypoint for weighted-template-matcher."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

from pydantic import ValidationError

from . import __version__, fastmatch, matcher
from .bench import bench_inputs, format_bench, run_bench
from .config import LOG_LEVELS, Settings, load_settings
from .core import Point, Region, Template
from .evaluation import EvalSample, ExperimentConfig, format_report, run_experiment
from .formats import (
    load_pgm,
    load_templates,
    read_annotations,
    read_weightmap,
    save_pgm,
    save_templates,
    write_annotations,
    write_heatmap,
    write_match_log,
    write_report_csv,
    write_weightmap,
)
from .plotting import plot_weightmap
from .synth import SceneParams, build_corpus
from .weightmaps import PRESET_NAMES, ExponentialParams, GaussianParams, WeightMap, WeightMapSetting, build_map, map_for_setting
from .workers import LogProgress

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
KIND_CHOICES = ("uniform", "gaussian", "exponential", *(name for name in PRESET_NAMES if name != "uniform"))
EXIT_OK = 0
EXIT_ERROR = 1


class SingleLineParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors on one line."""

    def error(self, message: str) -> NoReturn:
        """Print ``<prog>: error: <message>`` and exit with status 2."""
        self.exit(2, f"{self.prog}: error: {message}\n")


def _parse_anchor(text: str) -> Point:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"anchor must be x,y, got {text!r}")
    try:
        return Point(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"anchor must contain numbers, got {text!r}") from exc


def _parse_region(text: str) -> Region:
    try:
        return Region.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to a weighted-template-matcher TOML config file.")
    common.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, help="Logging level for stderr diagnostics.")
    common.add_argument("--threads", type=int, help="Worker threads; 0 uses every core.")
    return common


def _weight_parser() -> argparse.ArgumentParser:
    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--amplitude", type=float, help="Peak weight A (default 5).")
    weights.add_argument("--sigma-x", type=float, help="Horizontal Gaussian sigma (default 16).")
    weights.add_argument("--sigma-y", type=float, help="Vertical Gaussian sigma (default 8).")
    weights.add_argument("--circle-sigma", type=float, help="Sigma of the circular Gaussian preset (default 8).")
    weights.add_argument("--b", type=float, help="Horizontal exponential decay length (default 10).")
    weights.add_argument("--c", type=float, help="Vertical exponential decay length (default 10).")
    weights.add_argument(
        "--literal-abs-sum",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Use the ridge form exp(-|dx/b + dy/c|) for exponential maps.",
    )
    return weights


def build_parser() -> argparse.ArgumentParser:
    """Build the command-line parser without reading runtime configuration."""
    common = _common_parser()
    weights = _weight_parser()
    parser = SingleLineParser(prog="weighted-template-matcher", description="Weighted normalized correlation template matching.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=SingleLineParser)

    gen = commands.add_parser("gen-weights", parents=[common, weights], help="Write a weight map file.")
    gen.add_argument("--kind", choices=KIND_CHOICES, default="uniform", help="Generator or preset name.")
    gen.add_argument("--width", type=int, help="Map width in pixels (default 44).")
    gen.add_argument("--height", type=int, help="Map height in pixels (default 22).")
    gen.add_argument("--out", required=True, help="Weight map text file to write.")
    gen.add_argument("--heatmap", help="Also write the map as a grayscale PGM.")
    gen.add_argument("--plot", help="Also write a colour PNG preview.")

    match = commands.add_parser("match", parents=[common, weights], help="Find one template in one image.")
    match.add_argument("image", help="PGM image to search.")
    match.add_argument("template", help="PGM template.")
    match.add_argument("--weights", help="Weight map file; overrides --kind.")
    match.add_argument("--kind", choices=KIND_CHOICES, default="uniform", help="Weight map built for the template when --weights is absent.")
    match.add_argument("--fast", action="store_true", help="Use the summed-area-table matcher.")
    match.add_argument("--region", type=_parse_region, help="Search rectangle x,y,w,h.")
    match.add_argument("--anchor", type=_parse_anchor, help="Template anchor x,y (default: geometric center).")
    match.add_argument("--heatmap", help="Write the score surface as a grayscale PGM.")

    evaluate = commands.add_parser("evaluate", parents=[common, weights], help="Measure detection rates over a labelled set.")
    evaluate.add_argument("--images", required=True, help="Directory holding the test images.")
    evaluate.add_argument("--annotations", required=True, help="Annotation CSV; image paths are relative to --images.")
    evaluate.add_argument("--templates", required=True, help="Template directory.")
    evaluate.add_argument("--counts", help="Comma-separated template counts (default 10,45,80).")
    evaluate.add_argument("--threshold", type=float, help="Detection radius in pixels (default 8).")
    evaluate.add_argument("--kinds", help=f"Comma-separated presets from {', '.join(PRESET_NAMES)}.")
    evaluate.add_argument("--naive", action="store_true", help="Use the reference matcher instead of the fast one.")
    evaluate.add_argument("--out", required=True, help="Directory for report.txt, report.csv, and match_log.csv.")

    synth = commands.add_parser("synth", parents=[common], help="Generate a synthetic labelled corpus.")
    synth.add_argument("--count", type=int, default=50, help="Test scenes (default 50).")
    synth.add_argument("--train-count", type=int, default=80, help="Training scenes; each yields one template per eye (default 80).")
    synth.add_argument("--seed", type=int, help="Corpus seed (default 0).")
    synth.add_argument("--noise-sigma", type=float, help="Gaussian noise sigma in gray levels (default 12.75).")
    synth.add_argument("--template-width", type=int, help="Template width (default 44).")
    synth.add_argument("--template-height", type=int, help="Template height (default 22).")
    synth.add_argument("--template-jitter", type=int, default=2, help="Maximum template cut offset in pixels (default 2).")
    synth.add_argument("--image-width", type=int, default=SceneParams().image_w, help="Scene width (default 128).")
    synth.add_argument("--image-height", type=int, default=SceneParams().image_h, help="Scene height (default 96).")
    synth.add_argument("--out", required=True, help="Output directory.")

    bench = commands.add_parser("bench", parents=[common, weights], help="Time the naive and fast matchers.")
    bench.add_argument("--image", help="PGM image; a synthetic 256x256 scene when omitted.")
    bench.add_argument("--template", help="PGM template; cut from the synthetic scene when omitted.")
    bench.add_argument("--kind", choices=KIND_CHOICES, default="uniform", help="Weight map built for the template.")
    bench.add_argument("--region", type=_parse_region, help="Search rectangle x,y,w,h.")
    bench.add_argument("--iters", type=int, default=3, help="Timed runs per matcher; the best is reported (default 3).")
    bench.add_argument("--seed", type=int, help="Seed of the synthetic scene (default 0).")
    return parser


SETTING_FLAGS = (
    "threads",
    "log_level",
    "seed",
    "amplitude",
    "sigma_x",
    "sigma_y",
    "circle_sigma",
    "b",
    "c",
    "literal_abs_sum",
    "counts",
    "threshold",
    "kinds",
    "template_width",
    "template_height",
    "noise_sigma",
)


def resolve_settings(args: argparse.Namespace) -> Settings:
    """Merge explicit flags over environment, TOML, ``.env``, and defaults."""
    overrides = {name: getattr(args, name, None) for name in SETTING_FLAGS}
    if args.command == "gen-weights":
        overrides["template_width"] = args.width
        overrides["template_height"] = args.height
    return load_settings(args.config, overrides=overrides)


def configure_logging(level: str) -> None:
    """Send diagnostics to stderr; results never go through the log."""
    logging.basicConfig(level=level, stream=sys.stderr, format=LOG_FORMAT, force=True)


def _log_resolved(args: argparse.Namespace, settings: Settings) -> None:
    resolved: dict[str, Any] = {"command": args.command, "settings": settings.model_dump(mode="json")}
    for name, value in sorted(vars(args).items()):
        if name in SETTING_FLAGS or name in {"command", "config"}:
            continue
        resolved[name] = str(value) if isinstance(value, Region | Point) else value
    logger.info("resolved config %s", json.dumps(resolved, sort_keys=True))


def setting_for_kind(kind: str, settings: Settings) -> WeightMapSetting:
    """Resolve a generator kind or preset name with the configured parameters."""
    presets = settings.presets()
    if kind in presets:
        return presets[kind]
    if kind == "gaussian":
        return WeightMapSetting("gaussian", "gaussian", GaussianParams(settings.amplitude, settings.sigma_x, settings.sigma_y))
    if kind == "exponential":
        return WeightMapSetting("exponential", "exponential", ExponentialParams(settings.amplitude, settings.b, settings.c, literal_form=settings.literal_abs_sum))
    raise ValueError(f"unknown weight map kind {kind!r}; expected one of {', '.join(KIND_CHOICES)}")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_gen_weights(args: argparse.Namespace, settings: Settings) -> int:
    """Write a generated weight map centered in a ``width x height`` template."""
    setting = setting_for_kind(args.kind, settings)
    weight_map = build_map(settings.template_width, settings.template_height, setting.kind, setting.params)
    out = Path(args.out)
    _write_text(out, write_weightmap(weight_map))
    logger.info("wrote %s %dx%d weight map to %s", setting.name, weight_map.width, weight_map.height, out)
    if args.heatmap:
        save_pgm(Path(args.heatmap), write_heatmap(weight_map.weights))
    if args.plot:
        plot_weightmap(weight_map, args.plot, title=f"{setting.name} {weight_map.width}x{weight_map.height}")
    return EXIT_OK


def _load_template(path: str, anchor: Point | None) -> Template:
    image = load_pgm(Path(path))
    if anchor is None:
        return Template.centered(image, "right", 0)
    return Template(image=image, anchor=anchor, label="right", id=0)


def _template_map(template: Template, args: argparse.Namespace, settings: Settings) -> WeightMap:
    if getattr(args, "weights", None):
        return read_weightmap(Path(args.weights).read_text(encoding="utf-8"))
    return map_for_setting(template, setting_for_kind(args.kind, settings))


def cmd_match(args: argparse.Namespace, settings: Settings) -> int:
    """Print ``top_left_x top_left_y center_x center_y score`` for the best window."""
    image = load_pgm(Path(args.image))
    template = _load_template(args.template, args.anchor)
    weight_map = _template_map(template, args, settings)
    region = matcher.check_search(image, template, weight_map, args.region)
    if args.fast:
        surface = fastmatch.score_surface(image, template, weight_map, region, threads=settings.threads)
    else:
        surface = matcher.score_surface(image, template, weight_map, region)
    result = matcher.result_from_surface(surface, template, region)
    if args.heatmap:
        save_pgm(Path(args.heatmap), write_heatmap(surface))
    print(f"{result.top_left.x} {result.top_left.y} {result.center.x:g} {result.center.y:g} {result.score:.12f}")
    return EXIT_OK


def _load_samples(images_dir: Path, annotations_path: Path) -> list[EvalSample]:
    annotations = read_annotations(annotations_path.read_text(encoding="utf-8"))
    return [EvalSample(image=load_pgm(images_dir / annotation.image_id), annotation=annotation) for annotation in annotations]


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> int:
    """Run the detection-rate sweep and write the text report, CSV, and match log."""
    samples = _load_samples(Path(args.images), Path(args.annotations))
    templates = load_templates(args.templates)
    config = ExperimentConfig(
        template_counts=settings.count_list,
        threshold_px=settings.threshold,
        kinds=settings.weight_settings(),
    )
    report = run_experiment(
        samples,
        templates,
        config,
        threads=settings.threads,
        progress=LogProgress("evaluate"),
        matcher=matcher.match_template if args.naive else fastmatch.fast_match,
    )
    out = Path(args.out)
    text = format_report(report)
    _write_text(out / "report.txt", text)
    _write_text(out / "report.csv", write_report_csv(report))
    _write_text(out / "match_log.csv", write_match_log(report.records))
    logger.info("wrote report.txt, report.csv, and match_log.csv to %s", out)
    print(text, end="")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, settings: Settings) -> int:
    """Write test scenes, their annotations, and the extracted templates."""
    params = SceneParams(image_w=args.image_width, image_h=args.image_height, noise_sigma=settings.noise_sigma)
    corpus = build_corpus(
        count=args.count,
        train_count=args.train_count,
        seed=settings.seed,
        params=params,
        template_size=(settings.template_width, settings.template_height),
        template_jitter=args.template_jitter,
        threads=settings.threads,
        progress=LogProgress("synth"),
    )
    out = Path(args.out)
    images_dir = out / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    for scene in corpus.scenes:
        save_pgm(images_dir / scene.annotation.image_id, scene.image)
    _write_text(out / "annotations.csv", write_annotations([scene.annotation for scene in corpus.scenes]))
    save_templates(out / "templates", corpus.templates)
    logger.info("wrote %d scenes and %d templates to %s", len(corpus.scenes), len(corpus.templates), out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    """Check agreement, then print the naive-versus-fast timing table."""
    if (args.image is None) != (args.template is None):
        raise ValueError("--image and --template must be given together")
    if args.image is None:
        image, template = bench_inputs(settings.seed)
    else:
        image = load_pgm(Path(args.image))
        template = _load_template(args.template, None)
    weight_map = map_for_setting(template, setting_for_kind(args.kind, settings))
    report = run_bench(image, template, weight_map, args.iters, region=args.region, threads=settings.threads)
    print(format_bench(report), end="")
    return EXIT_OK


COMMANDS = {
    "gen-weights": cmd_gen_weights,
    "match": cmd_match,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "bench": cmd_bench,
}


def _error_message(exc: BaseException) -> str:
    if isinstance(exc, ValidationError):
        return "; ".join(f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors())
    text = str(exc) or type(exc).__name__
    return " ".join(text.split())


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, resolve settings, and run one subcommand.

    Args:
        argv: Arguments without the executable name. ``None`` reads ``sys.argv``.

    Returns:
        0 on success, 1 on a runtime error, 2 on an argument error.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        settings = resolve_settings(args)
        configure_logging(settings.log_level)
        _log_resolved(args, settings)
        return COMMANDS[args.command](args, settings)
    except (ValidationError, ValueError, IndexError, RuntimeError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {_error_message(exc)}", file=sys.stderr)
        return EXIT_ERROR
