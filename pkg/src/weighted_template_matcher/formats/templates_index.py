"""Template directories and their ``templates.csv`` index.

A directory holds one PGM per template. Templates are loaded in filename order and
numbered by position in that order, so the id order that decides ensemble ties and
template subsets is the order a directory listing shows.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import cast

from ..core import EYE_LABELS, EyeLabel, FormatParseError, Point, Template, geometric_center
from .common import iter_rows, parse_float, render
from .pgm import load_pgm, save_pgm

logger = logging.getLogger(__name__)

TEMPLATES_INDEX_NAME = "templates.csv"
TEMPLATES_INDEX_HEADER = ("template_path", "label", "anchor_x", "anchor_y")


@dataclass(frozen=True, slots=True)
class TemplateEntry:
    """One index row; ``path`` is relative to the template directory."""

    path: str
    label: EyeLabel
    anchor: Point


def _parse_label(value: str, line: int) -> EyeLabel:
    if value not in EYE_LABELS:
        raise FormatParseError(f"label must be one of {', '.join(EYE_LABELS)}, got {value!r}", line=line)
    return cast(EyeLabel, value)


def read_templates_index(text: str) -> list[TemplateEntry]:
    """Parse index rows in file order.

    Raises:
        FormatParseError: Bad header, column count, label, or anchor, with the line number.
    """
    entries: list[TemplateEntry] = []
    for line, fields in iter_rows(text, TEMPLATES_INDEX_HEADER):
        if not fields[0]:
            raise FormatParseError("template_path must not be empty", line=line)
        anchor = Point(parse_float(fields[2], "anchor_x", line), parse_float(fields[3], "anchor_y", line))
        entries.append(TemplateEntry(path=fields[0], label=_parse_label(fields[1], line), anchor=anchor))
    return entries


def write_templates_index(entries: Sequence[TemplateEntry]) -> str:
    """Serialize entries; anchors use ``repr`` so they read back exactly."""
    rows = [(entry.path, entry.label, repr(float(entry.anchor.x)), repr(float(entry.anchor.y))) for entry in entries]
    return render(TEMPLATES_INDEX_HEADER, rows)


def template_filename(template: Template) -> str:
    """File name used when saving a template: label prefix plus zero-padded id."""
    return f"{template.label}_{template.id:04d}.pgm"


def label_from_filename(name: str) -> EyeLabel:
    """Infer the side from a ``left``/``right`` filename prefix."""
    lowered = name.lower()
    for label in EYE_LABELS:
        if lowered.startswith(label):
            return label
    raise ValueError(f"cannot infer eye label from template file name {name!r}; expected a 'left' or 'right' prefix")


def save_templates(directory: str | Path, templates: Sequence[Template]) -> list[TemplateEntry]:
    """Write every template as PGM plus the index and return the written entries."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    entries: list[TemplateEntry] = []
    for template in templates:
        name = template_filename(template)
        save_pgm(root / name, template.image)
        entries.append(TemplateEntry(path=name, label=template.label, anchor=template.anchor))
    (root / TEMPLATES_INDEX_NAME).write_text(write_templates_index(entries), encoding="utf-8")
    return entries


def load_templates(directory: str | Path) -> list[Template]:
    """Load a template directory in filename order.

    With a ``templates.csv`` index, labels and anchors come from it. Without one,
    every ``*.pgm`` is loaded, the label comes from the filename prefix, and the anchor
    is the geometric center.

    Raises:
        FileNotFoundError: The directory does not exist.
        ValueError: No templates were found or a label cannot be inferred.
    """
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"template directory not found: {root}")
    index_path = root / TEMPLATES_INDEX_NAME
    if index_path.is_file():
        entries = sorted(read_templates_index(index_path.read_text(encoding="utf-8")), key=lambda entry: entry.path)
        templates = [
            Template(image=load_pgm(root / entry.path), anchor=entry.anchor, label=entry.label, id=position)
            for position, entry in enumerate(entries)
        ]
    else:
        paths = sorted(path for path in root.iterdir() if path.is_file() and path.suffix.lower() == ".pgm")
        templates = []
        for position, path in enumerate(paths):
            image = load_pgm(path)
            templates.append(Template(image=image, anchor=geometric_center(image.width, image.height), label=label_from_filename(path.name), id=position))
    if not templates:
        raise ValueError(f"no templates found in {root}")
    logger.info("loaded %d templates from %s", len(templates), root)
    return templates
