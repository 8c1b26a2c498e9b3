"""Tests for raster types and patch extraction."""

from unittest import TestCase

import numpy as np

from weighted_template_matcher.core import (
    FormatParseError,
    GrayImage,
    PixelPoint,
    Point,
    Region,
    Template,
    WindowRangeError,
    extract_patch,
    geometric_center,
    is_degenerate,
    quantize,
)


class ExtractPatchTests(TestCase):
    """Test row-major window extraction."""

    def test_identity_window_of_single_pixel_image(self) -> None:
        """Return the only pixel of a 1x1 image."""
        patch = extract_patch(GrayImage.from_flat(1, 1, [7]), PixelPoint(0, 0), 1, 1)
        self.assertEqual([7.0], patch.values.tolist())
        self.assertEqual(1, patch.n)

    def test_column_selection_follows_row_major_order(self) -> None:
        """Select the right column of a 2x2 image top to bottom."""
        image = GrayImage.from_flat(2, 2, [1, 2, 3, 4])
        self.assertEqual([2.0, 4.0], extract_patch(image, PixelPoint(1, 0), 1, 2).values.tolist())

    def test_inner_window_of_three_by_three_image(self) -> None:
        """Pick indices 4, 5, 7, 8 for the lower-right 2x2 window."""
        image = GrayImage.from_flat(3, 3, range(9))
        self.assertEqual([4.0, 5.0, 7.0, 8.0], extract_patch(image, PixelPoint(1, 1), 2, 2).values.tolist())

    def test_full_window_returns_pixels_unchanged(self) -> None:
        """Return every pixel when the window covers the image."""
        pixels = np.random.default_rng(3).integers(0, 256, size=(5, 7)).astype(float)
        image = GrayImage(pixels)
        np.testing.assert_array_equal(pixels.ravel(), extract_patch(image, PixelPoint(0, 0), 7, 5).values)

    def test_disjoint_windows_share_no_source_index(self) -> None:
        """Extract from an index image and check the two index sets do not overlap."""
        image = GrayImage.from_flat(6, 4, range(24))
        left = extract_patch(image, PixelPoint(0, 0), 3, 4).values
        right = extract_patch(image, PixelPoint(3, 1), 3, 2).values
        self.assertEqual(set(), set(left.tolist()) & set(right.tolist()))

    def test_out_of_bounds_window_names_the_axis(self) -> None:
        """Raise a range error that names the offending coordinate range."""
        image = GrayImage.from_flat(3, 3, range(9))
        with self.assertRaisesRegex(WindowRangeError, "x range"):
            extract_patch(image, PixelPoint(2, 0), 2, 1)
        with self.assertRaisesRegex(WindowRangeError, "y range"):
            extract_patch(image, PixelPoint(0, -1), 1, 2)

    def test_patch_is_read_only(self) -> None:
        """Reject writes into an extracted patch."""
        patch = extract_patch(GrayImage.from_flat(2, 1, [1, 2]), PixelPoint(0, 0), 2, 1)
        with self.assertRaises(ValueError):
            patch.values[0] = 9.0


class GrayImageTests(TestCase):
    """Test image validation."""

    def test_rejects_out_of_range_intensity(self) -> None:
        """Refuse intensities outside [0, 255]."""
        with self.assertRaisesRegex(ValueError, r"\[0, 255\]"):
            GrayImage.from_flat(2, 1, [0, 256])

    def test_rejects_non_finite_intensity(self) -> None:
        """Refuse NaN pixels."""
        with self.assertRaisesRegex(ValueError, "finite"):
            GrayImage.from_flat(2, 1, [0, float("nan")])

    def test_rejects_length_mismatch(self) -> None:
        """Require width * height intensities."""
        with self.assertRaisesRegex(ValueError, "expected 6"):
            GrayImage.from_flat(3, 2, [1, 2, 3])

    def test_crop_returns_region(self) -> None:
        """Crop the requested rectangle."""
        image = GrayImage.from_flat(3, 3, range(9))
        self.assertEqual([[4.0, 5.0], [7.0, 8.0]], image.crop(Region(1, 1, 2, 2)).pixels.tolist())

    def test_input_array_is_copied(self) -> None:
        """Keep the image independent of later writes to the source array."""
        source = np.zeros((2, 2))
        image = GrayImage(source)
        source[0, 0] = 50.0
        self.assertEqual(0.0, image.pixels[0, 0])


class TemplateTests(TestCase):
    """Test template anchors and labels."""

    def test_default_anchor_is_geometric_center(self) -> None:
        """Anchor even-sized templates on the half-pixel center."""
        template = Template.centered(GrayImage(np.zeros((22, 44))), "right", 0)
        self.assertEqual(Point(21.5, 10.5), template.anchor)
        self.assertEqual(Point(2.0, 2.0), geometric_center(5, 5))

    def test_anchor_outside_template_is_rejected(self) -> None:
        """Require 0 <= anchor < dimension on both axes."""
        with self.assertRaisesRegex(ValueError, "anchor"):
            Template(image=GrayImage(np.zeros((2, 4))), anchor=Point(4.0, 0.0), label="left", id=0)

    def test_unknown_label_is_rejected(self) -> None:
        """Accept only left and right."""
        with self.assertRaisesRegex(ValueError, "label"):
            Template.centered(GrayImage(np.zeros((2, 2))), "nose", 0)  # type: ignore[arg-type]


class HelperTests(TestCase):
    """Test small numeric helpers and error types."""

    def test_region_parse(self) -> None:
        """Parse the x,y,w,h command-line form."""
        self.assertEqual(Region(1, 2, 30, 40), Region.parse("1, 2,30,40"))
        with self.assertRaises(ValueError):
            Region.parse("1,2,3")
        with self.assertRaises(ValueError):
            Region.parse("0,0,0,4")

    def test_quantize_rounds_half_up_and_clamps(self) -> None:
        """Round .5 upward and clamp to the 8-bit range."""
        self.assertEqual([1.0, 1.0, 3.0, 0.0, 255.0], quantize(np.array([0.5, 1.49, 2.5, -3.0, 300.0])).tolist())

    def test_degenerate_detection(self) -> None:
        """Flag constant values and accept varying ones."""
        self.assertTrue(is_degenerate(np.full(10, 42.0)))
        self.assertFalse(is_degenerate(np.array([0.0, 1.0])))

    def test_format_parse_error_carries_location(self) -> None:
        """Append the byte offset or line number to the message."""
        by_offset = FormatParseError("bad", offset=4)
        by_line = FormatParseError("bad", line=3)
        self.assertEqual("bad at byte 4", str(by_offset))
        self.assertEqual(4, by_offset.offset)
        self.assertEqual("bad at line 3", str(by_line))
        self.assertEqual(3, by_line.line)
