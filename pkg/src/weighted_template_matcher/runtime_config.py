"""Loading helpers for weighted-template-matcher TOML configuration."""

from __future__ import annotations

import os
import tomllib
from collections.abc import Mapping
from pathlib import Path
from typing import Any

CONFIG_FILE_ENV = "WTM_CONFIG_FILE"

# These TOML keys mirror environment-backed Settings fields. Values already set in
# the environment win over the file.
SETTINGS_ENV_KEYS: dict[str, str] = {
    "threads": "WTM_THREADS",
    "seed": "WTM_SEED",
    "log_level": "WTM_LOG_LEVEL",
    "amplitude": "WTM_AMPLITUDE",
    "sigma_x": "WTM_SIGMA_X",
    "sigma_y": "WTM_SIGMA_Y",
    "circle_sigma": "WTM_CIRCLE_SIGMA",
    "b": "WTM_B",
    "c": "WTM_C",
    "literal_abs_sum": "WTM_LITERAL_ABS_SUM",
    "counts": "WTM_COUNTS",
    "threshold": "WTM_THRESHOLD",
    "kinds": "WTM_KINDS",
    "template_width": "WTM_TEMPLATE_WIDTH",
    "template_height": "WTM_TEMPLATE_HEIGHT",
    "noise_sigma": "WTM_NOISE_SIGMA",
}


def read_runtime_config(path: str | None) -> tuple[dict[str, Any], Path | None]:
    """Read an optional TOML configuration file.

    Args:
        path: Explicit path, or ``None`` to use ``WTM_CONFIG_FILE``.

    Returns:
        The parsed root table and resolved source path. Both are empty when no
        configuration file is selected.

    Raises:
        OSError: The selected file cannot be read.
        tomllib.TOMLDecodeError: The selected file is not valid TOML.
    """
    selected = path or os.environ.get(CONFIG_FILE_ENV)
    if not selected:
        return {}, None
    config_path = Path(selected).expanduser().resolve()
    with config_path.open("rb") as handle:
        loaded = tomllib.load(handle)
    return loaded, config_path


def config_section(config: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    """Return a mapping-valued root section, or an empty mapping."""
    value = config.get(name)
    return value if isinstance(value, Mapping) else {}


def _environment_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, list | tuple):
        return ",".join(_environment_value(item) for item in value)
    return str(value)


def apply_settings_environment(config: Mapping[str, Any]) -> list[str]:
    """Expose ``[settings]`` values through the Settings environment API.

    Existing OS environment variables are never replaced. Lists such as
    ``counts = [10, 45, 80]`` are joined with commas.

    Returns:
        The environment names that were set from the file.

    Raises:
        ValueError: ``[settings]`` holds a key with no matching setting.
    """
    settings = config_section(config, "settings")
    unknown = sorted(set(settings) - set(SETTINGS_ENV_KEYS))
    if unknown:
        raise ValueError(f"unknown [settings] keys: {', '.join(unknown)}")
    applied: list[str] = []
    for key, environment_name in SETTINGS_ENV_KEYS.items():
        value = settings.get(key)
        if value is None or environment_name in os.environ:
            continue
        os.environ[environment_name] = _environment_value(value)
        applied.append(environment_name)
    return applied
