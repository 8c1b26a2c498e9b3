"""Tests for on-disk formats."""

import math
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np

from weighted_template_matcher.core import FormatParseError, GrayImage, PixelPoint, Point, Template
from weighted_template_matcher.evaluation import EvalReport, MatchRecord
from weighted_template_matcher.formats import (
    TEMPLATES_INDEX_NAME,
    TemplateEntry,
    label_from_filename,
    load_pgm,
    load_templates,
    read_annotations,
    read_match_log,
    read_pgm,
    read_templates_index,
    read_weightmap,
    save_pgm,
    save_templates,
    write_annotations,
    write_heatmap,
    write_match_log,
    write_pgm,
    write_report_csv,
    write_templates_index,
    write_weightmap,
)
from weighted_template_matcher.synth import Annotation, SceneParams, build_corpus, generate_scene
from weighted_template_matcher.weightmaps import (
    GaussianParams,
    gaussian_map,
    map_for_setting,
    preset_settings,
    uniform_map,
    weight_map_from_array,
)


class PgmTests(TestCase):
    """Test the binary PGM reader and writer."""

    def test_reads_minimal_file(self) -> None:
        """Decode a 2x2 raster in row-major order."""
        image = read_pgm(b"P5\n2 2\n255\n" + bytes([0, 1, 2, 255]))
        self.assertEqual([[0.0, 1.0], [2.0, 255.0]], image.pixels.tolist())

    def test_reads_comments_and_small_maxval(self) -> None:
        """Skip header comments and keep intensities verbatim below maxval 255."""
        image = read_pgm(b"P5 # scanner\n3 1 # size\n100\n" + bytes([7, 8, 100]))
        self.assertEqual([7.0, 8.0, 100.0], image.values.tolist())

    def test_writes_canonical_header(self) -> None:
        """Emit P5, the size, 255, and the rounded raster."""
        data = write_pgm(GrayImage(np.array([[0.0, 127.5, 255.0]])))
        self.assertEqual(b"P5\n3 1\n255\n" + bytes([0, 128, 255]), data)

    def test_malformed_files_report_byte_offsets(self) -> None:
        """Reject bad magic, maxval, truncation, and trailing bytes at their offsets."""
        with self.assertRaises(FormatParseError) as bad_magic:
            read_pgm(b"P6\n1 1\n255\n\x00")
        self.assertEqual(0, bad_magic.exception.offset)
        with self.assertRaisesRegex(FormatParseError, "maxval"):
            read_pgm(b"P5\n1 1\n256\n\x00")
        with self.assertRaisesRegex(FormatParseError, "truncated") as truncated:
            read_pgm(b"P5\n2 2\n255\n\x00\x01")
        self.assertEqual(13, truncated.exception.offset)
        with self.assertRaisesRegex(FormatParseError, "trailing") as trailing:
            read_pgm(b"P5\n1 1\n255\n\x00\x00")
        self.assertEqual(12, trailing.exception.offset)
        with self.assertRaises(FormatParseError):
            read_pgm(b"P5\n2 x\n255\n\x00\x00")

    def test_scenes_survive_disk_round_trip(self) -> None:
        """Reload generated scenes pixel for pixel."""
        with tempfile.TemporaryDirectory() as tmp:
            for seed in range(3):
                image = generate_scene(SceneParams(seed=seed)).image
                path = Path(tmp) / "nested" / f"scene_{seed}.pgm"
                save_pgm(path, image)
                np.testing.assert_array_equal(image.pixels, load_pgm(path).pixels)


class AnnotationTests(TestCase):
    """Test the annotation CSV."""

    def test_round_trip(self) -> None:
        """Write and read two rows in order."""
        annotations = [
            Annotation("scene_0000.pgm", PixelPoint(38, 48), PixelPoint(90, 47)),
            Annotation("scene_0001.pgm", PixelPoint(40, 50), PixelPoint(88, 45)),
        ]
        text = write_annotations(annotations)
        self.assertTrue(text.startswith("image_path,right_eye_x,right_eye_y,left_eye_x,left_eye_y\nscene_0000.pgm,38,48,90,47\n"))
        self.assertEqual(annotations, read_annotations(text))

    def test_errors_carry_line_numbers(self) -> None:
        """Report the failing line for bad headers, columns, and values."""
        header = "image_path,right_eye_x,right_eye_y,left_eye_x,left_eye_y\n"
        with self.assertRaises(FormatParseError) as bad_header:
            read_annotations("path,x\n")
        self.assertEqual(1, bad_header.exception.line)
        with self.assertRaises(FormatParseError) as bad_columns:
            read_annotations(header + "a.pgm,1,2,3,4\nb.pgm,1,2\n")
        self.assertEqual(3, bad_columns.exception.line)
        with self.assertRaises(FormatParseError) as negative:
            read_annotations(header + "a.pgm,1,-2,3,4\n")
        self.assertEqual(2, negative.exception.line)
        self.assertEqual([], read_annotations(header))

    def test_paths_with_commas_are_refused(self) -> None:
        """Refuse paths that would shift columns."""
        with self.assertRaises(ValueError):
            write_annotations([Annotation("a,b.pgm", PixelPoint(1, 1), PixelPoint(2, 2))])


class WeightMapTextTests(TestCase):
    """Test the plain-text weight-map format."""

    def test_writes_fixed_and_scientific_values(self) -> None:
        """Use eight decimals from 1 up and scientific notation below."""
        self.assertEqual("2 1\n1.00000000 1.00000000\n", write_weightmap(uniform_map(2, 1)))
        self.assertEqual("1 1\n5.00000000e-01\n", write_weightmap(weight_map_from_array(np.array([[0.5]]))))

    def test_generated_map_reads_back_closely(self) -> None:
        """Reload the 44x22 Gaussian within the written precision."""
        original = gaussian_map(44, 22, GaussianParams(5.0, 16.0, 8.0))
        text = write_weightmap(original)
        reread = read_weightmap(text)
        self.assertEqual("custom", reread.kind)
        np.testing.assert_allclose(reread.weights, original.weights, rtol=0, atol=1e-8)
        self.assertEqual(text, write_weightmap(reread))

    def test_errors_carry_line_numbers(self) -> None:
        """Reject bad sizes, row counts, and non-positive values."""
        with self.assertRaises(FormatParseError) as bad_size:
            read_weightmap("2\n1 1\n")
        self.assertEqual(1, bad_size.exception.line)
        with self.assertRaises(FormatParseError):
            read_weightmap("2 2\n1 1\n")
        with self.assertRaises(FormatParseError) as short_row:
            read_weightmap("2 2\n1 1\n1\n")
        self.assertEqual(3, short_row.exception.line)
        with self.assertRaises(FormatParseError) as zero:
            read_weightmap("2 1\n1 0\n")
        self.assertEqual(2, zero.exception.line)
        with self.assertRaises(FormatParseError):
            read_weightmap("1 1\nnan\n")


class HeatmapTests(TestCase):
    """Test score-to-grayscale rendering."""

    def test_rescales_finite_values(self) -> None:
        """Map the minimum to 0, the maximum to 255, and NaN to 0."""
        image = write_heatmap(np.array([[0.0, 1.0], [np.nan, 0.5]]))
        self.assertEqual([[0.0, 255.0], [0.0, 127.5]], image.pixels.tolist())

    def test_constant_and_empty_fields(self) -> None:
        """Paint constant fields at 128 and all-NaN fields at 0."""
        self.assertEqual([128.0, 128.0], write_heatmap(np.array([[0.3, 0.3]])).values.tolist())
        self.assertEqual([0.0, 0.0], write_heatmap(np.full((1, 2), np.nan)).values.tolist())
        with self.assertRaises(ValueError):
            write_heatmap(np.zeros(3))


class TemplateDirectoryTests(TestCase):
    """Test template directories and their index."""

    def test_saved_templates_reload_in_filename_order(self) -> None:
        """Restore labels and anchors and renumber by file name."""
        pixels = np.arange(12.0).reshape(3, 4)
        templates = [
            Template(image=GrayImage(pixels), anchor=Point(2.0, 1.0), label="right", id=0),
            Template(image=GrayImage(pixels + 1.0), anchor=Point(1.5, 1.0), label="left", id=1),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            entries = save_templates(tmp, templates)
            self.assertEqual(["right_0000.pgm", "left_0001.pgm"], [entry.path for entry in entries])
            self.assertTrue((Path(tmp) / TEMPLATES_INDEX_NAME).is_file())
            loaded = load_templates(tmp)
        self.assertEqual(["left", "right"], [template.label for template in loaded])
        self.assertEqual([0, 1], [template.id for template in loaded])
        self.assertEqual(Point(1.5, 1.0), loaded[0].anchor)
        np.testing.assert_array_equal(pixels, loaded[1].image.pixels)

    def test_directory_without_index_uses_prefixes(self) -> None:
        """Infer labels from file names and anchor at the geometric center."""
        with tempfile.TemporaryDirectory() as tmp:
            save_pgm(Path(tmp) / "right_a.pgm", GrayImage(np.arange(6.0).reshape(2, 3)))
            save_pgm(Path(tmp) / "Left_b.pgm", GrayImage(np.arange(6.0).reshape(3, 2)))
            (Path(tmp) / "notes.txt").write_text("ignored", encoding="utf-8")
            loaded = load_templates(tmp)
        self.assertEqual(["left", "right"], [template.label for template in loaded])
        self.assertEqual(Point(0.5, 1.0), loaded[0].anchor)
        self.assertEqual(Point(1.0, 0.5), loaded[1].anchor)

    def test_missing_or_empty_directories_fail(self) -> None:
        """Raise for a missing directory, an empty one, and an unlabeled file."""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(FileNotFoundError):
                load_templates(Path(tmp) / "absent")
            with self.assertRaises(ValueError):
                load_templates(tmp)
            save_pgm(Path(tmp) / "eye.pgm", GrayImage(np.arange(4.0).reshape(2, 2)))
            with self.assertRaises(ValueError):
                load_templates(tmp)
        with self.assertRaises(ValueError):
            label_from_filename("nose_1.pgm")

    def test_index_round_trip_and_errors(self) -> None:
        """Read back exact anchors and reject unknown labels."""
        entries = [TemplateEntry("right_0000.pgm", "right", Point(21.5, 10.5))]
        self.assertEqual(entries, read_templates_index(write_templates_index(entries)))
        with self.assertRaises(FormatParseError) as bad_label:
            read_templates_index("template_path,label,anchor_x,anchor_y\na.pgm,nose,1,1\n")
        self.assertEqual(2, bad_label.exception.line)


class MatchLogTests(TestCase):
    """Test the per-image match log and report CSV."""

    def test_round_trip_keeps_misses_and_exact_floats(self) -> None:
        """Preserve empty windows, infinities, NaN scores, and float bits."""
        records = [
            MatchRecord("a.pgm", "right", "gauss-ellipse", 10, 3, PixelPoint(16, 37), Point(38.0, 48.0), 0.1 + 0.2, 1 / 3),
            MatchRecord("a.pgm", "left", "uniform", 10, None, None, None, math.nan, math.inf),
        ]
        text = write_match_log(records)
        self.assertIn("a.pgm,left,uniform,10,,,,,,nan,inf", text.splitlines())
        hit, miss = read_match_log(text)
        self.assertEqual(records[0], hit)
        self.assertIsNone(miss.template_id)
        self.assertTrue(math.isnan(miss.score))
        self.assertEqual(math.inf, miss.error)

    def test_bad_rows_are_reported_by_line(self) -> None:
        """Reject unknown eyes with the failing line."""
        text = write_match_log([MatchRecord("a.pgm", "right", "uniform", 1, 0, PixelPoint(0, 0), Point(1.0, 1.0), 0.5, 2.0)])
        with self.assertRaises(FormatParseError) as bad_eye:
            read_match_log(text.replace(",right,", ",nose,"))
        self.assertEqual(2, bad_eye.exception.line)

    def test_report_csv_header_and_rows(self) -> None:
        """Write one full-precision row per cell."""
        report = EvalReport(
            rates={("right", "uniform", 10): 0.5},
            deltas={("right", "uniform", 10): 0.0},
            eyes=("right",),
            kinds=("uniform",),
            counts=(10,),
            baseline="uniform",
            threshold_px=8.0,
        )
        self.assertEqual("eye,kind,count,rate,delta\nright,uniform,10,0.5,0.0\n", write_report_csv(report))


class CorpusRoundTripTests(TestCase):
    """Test byte-identical rewrites over a generated corpus."""

    @classmethod
    def setUpClass(cls) -> None:
        """Generate 50 noisy scenes and one template per scene."""
        cls.corpus = build_corpus(count=50, train_count=0, seed=2718)

    def test_pgm_bytes_survive_read_and_write(self) -> None:
        """Rewrite every scene file to the same bytes."""
        for scene in self.corpus.scenes:
            data = write_pgm(scene.image)
            self.assertEqual(data, write_pgm(read_pgm(data)), scene.annotation.image_id)

    def test_annotation_text_survives_read_and_write(self) -> None:
        """Rewrite the 50-row annotation file to the same text."""
        text = write_annotations([scene.annotation for scene in self.corpus.scenes])
        self.assertEqual(51, len(text.splitlines()))
        self.assertEqual(text, write_annotations(read_annotations(text)))

    def test_weightmap_text_survives_read_and_write(self) -> None:
        """Rewrite 50 preset maps of varying size to the same text."""
        presets = list(preset_settings().values())
        for index, scene in enumerate(self.corpus.scenes):
            center = scene.annotation.right_eye
            template = Template.centered(GrayImage(scene.image.pixels[center.y - 5 : center.y + 6, center.x - 3 - index % 7 : center.x + 4]), "right", index)
            text = write_weightmap(map_for_setting(template, presets[index % len(presets)]))
            self.assertEqual(text, write_weightmap(read_weightmap(text)), index)
