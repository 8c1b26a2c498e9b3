"""Readers and writers for every on-disk artifact."""

from .annotations import ANNOTATION_HEADER, read_annotations, write_annotations
from .heatmap import write_heatmap
from .match_log import MATCH_LOG_HEADER, read_match_log, write_match_log, write_report_csv
from .pgm import load_pgm, read_pgm, save_pgm, write_pgm
from .templates_index import (
    TEMPLATES_INDEX_NAME,
    TemplateEntry,
    label_from_filename,
    load_templates,
    read_templates_index,
    save_templates,
    write_templates_index,
)
from .weightmap_text import read_weightmap, write_weightmap

__all__ = [
    "ANNOTATION_HEADER",
    "MATCH_LOG_HEADER",
    "TEMPLATES_INDEX_NAME",
    "TemplateEntry",
    "label_from_filename",
    "load_pgm",
    "load_templates",
    "read_annotations",
    "read_match_log",
    "read_pgm",
    "read_templates_index",
    "read_weightmap",
    "save_pgm",
    "save_templates",
    "write_annotations",
    "write_heatmap",
    "write_match_log",
    "write_pgm",
    "write_report_csv",
    "write_templates_index",
    "write_weightmap",
]
