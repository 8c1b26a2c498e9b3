"""Tests for cli behavior."""

import io
import os
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import TestCase

import numpy as np

from weighted_template_matcher.cli import build_parser, main, setting_for_kind
from weighted_template_matcher.config import ENV_FILE_ENV, Settings
from weighted_template_matcher.core import GrayImage
from weighted_template_matcher.formats import (
    MATCH_LOG_HEADER,
    load_pgm,
    load_templates,
    read_annotations,
    read_weightmap,
    save_pgm,
)
from weighted_template_matcher.runtime_config import CONFIG_FILE_ENV, SETTINGS_ENV_KEYS
from weighted_template_matcher.weightmaps import GaussianParams, gaussian_map

ENVIRONMENT_NAMES = {CONFIG_FILE_ENV, ENV_FILE_ENV, *SETTINGS_ENV_KEYS.values()}


def run_cli(*argv: str) -> tuple[int, str, str]:
    """Run ``main`` and capture its stdout and stderr."""
    stdout = io.StringIO()
    stderr = io.StringIO()
    with redirect_stdout(stdout), redirect_stderr(stderr):
        code = main(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class CliTestCase(TestCase):
    """Run every command in a scratch directory with a clean environment."""

    def setUp(self) -> None:
        """Clear WTM_* variables and point the .env lookup at a missing file."""
        self.original_env = {name: os.environ.get(name) for name in ENVIRONMENT_NAMES}
        for name in ENVIRONMENT_NAMES:
            os.environ.pop(name, None)
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        os.environ[ENV_FILE_ENV] = str(self.root / "absent.env")

    def tearDown(self) -> None:
        """Restore the original environment."""
        for name, original_value in self.original_env.items():
            if original_value is None:
                os.environ.pop(name, None)
            else:
                os.environ[name] = original_value
        self.tmp.cleanup()

    def planted_files(self) -> tuple[Path, Path]:
        """Write a random image and a 8x6 template cut from it at (12, 7)."""
        pixels = np.random.default_rng(1).integers(0, 256, size=(30, 40)).astype(np.float64)
        image_path = self.root / "image.pgm"
        template_path = self.root / "template.pgm"
        save_pgm(image_path, GrayImage(pixels))
        save_pgm(template_path, GrayImage(pixels[7:13, 12:20]))
        return image_path, template_path


class ParserTests(CliTestCase):
    """Test argument parsing."""

    def test_subcommands_and_defaults(self) -> None:
        """Parse every subcommand with its defaults."""
        parser = build_parser()
        args = parser.parse_args(["synth", "--out", "corpus"])
        self.assertEqual((50, 80, 2), (args.count, args.train_count, args.template_jitter))
        self.assertEqual((128, 96), (args.image_width, args.image_height))
        args = parser.parse_args(["match", "a.pgm", "b.pgm", "--region", "1,2,30,20", "--anchor", "3.5,2"])
        self.assertEqual((1, 2, 30, 20), (args.region.x, args.region.y, args.region.width, args.region.height))
        self.assertEqual((3.5, 2.0), (args.anchor.x, args.anchor.y))
        self.assertEqual(3, parser.parse_args(["bench"]).iters)

    def test_usage_errors_exit_with_status_two_on_one_line(self) -> None:
        """Report usage errors as a single stderr line."""
        code, _, stderr = run_cli("match", "a.pgm", "b.pgm", "--region", "1,2,3")
        self.assertEqual(2, code)
        self.assertEqual(1, len(stderr.strip().splitlines()))
        self.assertIn("error:", stderr)
        self.assertEqual(2, run_cli()[0])

    def test_kind_resolution(self) -> None:
        """Map generator names and presets to settings."""
        settings = Settings(_env_file=None, WTM_SIGMA_X=4.0)
        self.assertEqual(GaussianParams(5.0, 4.0, 8.0), setting_for_kind("gaussian", settings).params)
        self.assertEqual("gauss-circle", setting_for_kind("gauss-circle", settings).name)
        with self.assertRaises(ValueError):
            setting_for_kind("laplace", settings)


class GenWeightsTests(CliTestCase):
    """Test the gen-weights command."""

    def test_writes_map_heatmap_and_plot(self) -> None:
        """Write the elliptical map, its grayscale rendering, and a PNG."""
        out = self.root / "maps" / "ellipse.txt"
        heatmap = self.root / "maps" / "ellipse.pgm"
        plot = self.root / "maps" / "ellipse.png"
        code, _, _ = run_cli("gen-weights", "--kind", "gauss-ellipse", "--out", str(out), "--heatmap", str(heatmap), "--plot", str(plot))
        self.assertEqual(0, code)
        written = read_weightmap(out.read_text(encoding="utf-8"))
        expected = gaussian_map(44, 22, GaussianParams(5.0, 16.0, 8.0))
        np.testing.assert_allclose(written.weights, expected.weights, rtol=0, atol=1e-8)
        self.assertEqual((22, 44), load_pgm(heatmap).pixels.shape)
        self.assertEqual(b"\x89PNG", plot.read_bytes()[:4])

    def test_flags_override_size_and_parameters(self) -> None:
        """Honor --width, --height, and --amplitude."""
        out = self.root / "small.txt"
        code, _, _ = run_cli("gen-weights", "--kind", "gaussian", "--width", "5", "--height", "3", "--amplitude", "2", "--out", str(out))
        self.assertEqual(0, code)
        written = read_weightmap(out.read_text(encoding="utf-8"))
        self.assertEqual((3, 5), written.weights.shape)
        self.assertEqual(2.0, float(written.weights[1, 2]))

    def test_invalid_settings_exit_with_status_one(self) -> None:
        """Report validation failures as runtime errors."""
        code, _, stderr = run_cli("gen-weights", "--width", "0", "--out", str(self.root / "w.txt"))
        self.assertEqual(1, code)
        self.assertTrue(stderr.startswith("error: "))

    def test_config_file_supplies_settings(self) -> None:
        """Read the map size from a TOML file."""
        config = self.root / "wtm.toml"
        config.write_text("[settings]\ntemplate_width = 7\ntemplate_height = 5\n", encoding="utf-8")
        out = self.root / "from_config.txt"
        code, _, _ = run_cli("gen-weights", "--config", str(config), "--out", str(out))
        self.assertEqual(0, code)
        self.assertEqual((5, 7), read_weightmap(out.read_text(encoding="utf-8")).weights.shape)


class MatchTests(CliTestCase):
    """Test the match command."""

    def test_prints_planted_location(self) -> None:
        """Print the top-left corner, center, and score for both matchers."""
        image, template = self.planted_files()
        for extra in ([], ["--fast"], ["--kind", "gauss-circle"]):
            code, stdout, _ = run_cli("match", str(image), str(template), *extra)
            self.assertEqual(0, code)
            self.assertEqual("12 7 15.5 9.5 1.000000000000", stdout.strip())

    def test_region_anchor_weights_and_heatmap(self) -> None:
        """Search a region with a custom anchor, a map file, and a heatmap."""
        image, template = self.planted_files()
        weights = self.root / "w.txt"
        heatmap = self.root / "surface.pgm"
        self.assertEqual(0, run_cli("gen-weights", "--kind", "exp", "--width", "8", "--height", "6", "--out", str(weights))[0])
        code, stdout, _ = run_cli(
            "match", str(image), str(template), "--weights", str(weights), "--region", "10,5,20,15", "--anchor", "0,0", "--heatmap", str(heatmap),
        )
        self.assertEqual(0, code)
        self.assertEqual(["12", "7", "12", "7"], stdout.split()[:4])
        self.assertEqual((10, 13), load_pgm(heatmap).pixels.shape)

    def test_missing_files_exit_with_status_one(self) -> None:
        """Report unreadable inputs as runtime errors."""
        code, _, stderr = run_cli("match", str(self.root / "missing.pgm"), str(self.root / "missing.pgm"))
        self.assertEqual(1, code)
        self.assertIn("error:", stderr)


class CorpusWorkflowTests(CliTestCase):
    """Test synth followed by evaluate."""

    def test_synth_then_evaluate(self) -> None:
        """Generate a small corpus and write all three evaluation outputs."""
        corpus = self.root / "corpus"
        code, _, _ = run_cli("synth", "--count", "2", "--train-count", "2", "--seed", "3", "--threads", "1", "--out", str(corpus))
        self.assertEqual(0, code)
        annotations = read_annotations((corpus / "annotations.csv").read_text(encoding="utf-8"))
        self.assertEqual(["scene_0000.pgm", "scene_0001.pgm"], [item.image_id for item in annotations])
        self.assertEqual((96, 128), load_pgm(corpus / "images" / "scene_0000.pgm").pixels.shape)
        self.assertEqual(["left", "left", "right", "right"], [template.label for template in load_templates(corpus / "templates")])

        out = self.root / "report"
        code, stdout, _ = run_cli(
            "evaluate",
            "--images", str(corpus / "images"),
            "--annotations", str(corpus / "annotations.csv"),
            "--templates", str(corpus / "templates"),
            "--counts", "1,2",
            "--kinds", "uniform,exp",
            "--threads", "2",
            "--out", str(out),
        )
        self.assertEqual(0, code)
        self.assertIn("Detection percentage (error <8 pixels): exp", stdout)
        self.assertEqual(stdout, (out / "report.txt").read_text(encoding="utf-8"))
        csv_lines = (out / "report.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual("eye,kind,count,rate,delta", csv_lines[0])
        self.assertEqual(1 + 2 * 2 * 2, len(csv_lines))
        log_lines = (out / "match_log.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(",".join(MATCH_LOG_HEADER), log_lines[0])
        self.assertEqual(1 + 2 * 2 * 2 * 2, len(log_lines))

    def test_evaluate_rejects_too_many_templates_requested(self) -> None:
        """Exit with status one when a count exceeds the template supply."""
        corpus = self.root / "corpus"
        self.assertEqual(0, run_cli("synth", "--count", "1", "--train-count", "1", "--out", str(corpus))[0])
        code, _, stderr = run_cli(
            "evaluate",
            "--images", str(corpus / "images"),
            "--annotations", str(corpus / "annotations.csv"),
            "--templates", str(corpus / "templates"),
            "--counts", "3",
            "--out", str(self.root / "report"),
        )
        self.assertEqual(1, code)
        self.assertIn("only 1 available", stderr)


class BenchCommandTests(CliTestCase):
    """Test the bench command."""

    def test_prints_timing_table(self) -> None:
        """Time both matchers on supplied files."""
        image, template = self.planted_files()
        code, stdout, _ = run_cli("bench", "--image", str(image), "--template", str(template), "--iters", "1")
        self.assertEqual(0, code)
        self.assertIn("windows    825", stdout)
        self.assertIn("speedup", stdout)

    def test_image_without_template_is_an_error(self) -> None:
        """Require --image and --template together."""
        image, _ = self.planted_files()
        code, _, stderr = run_cli("bench", "--image", str(image))
        self.assertEqual(1, code)
        self.assertIn("together", stderr)
