"""Environment-backed settings shared by every subcommand."""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .runtime_config import apply_settings_environment, read_runtime_config
from .weightmaps import PRESET_NAMES, WeightMapSetting, preset_settings, select_settings

logger = logging.getLogger(__name__)

ENV_FILE_ENV = "WTM_ENV_FILE"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def default_env_file() -> Path:
    """``WTM_ENV_FILE`` or ``./.env``."""
    return Path(os.environ.get(ENV_FILE_ENV) or Path.cwd() / ".env").expanduser().resolve()


def split_comma_separated(value: str | None) -> list[str]:
    """Split a comma-separated setting, dropping blanks."""
    if value is None:
        return []
    return [item.strip() for item in value.split(",") if item.strip()]


class Settings(BaseSettings):
    """Typed run settings loaded from environment variables and ``.env``."""

    model_config = SettingsConfigDict(case_sensitive=False, extra="ignore")

    threads: int = Field(default=0, validation_alias="WTM_THREADS")
    seed: int = Field(default=0, validation_alias="WTM_SEED")
    log_level: str = Field(default="INFO", validation_alias="WTM_LOG_LEVEL")
    amplitude: float = Field(default=5.0, validation_alias="WTM_AMPLITUDE")
    sigma_x: float = Field(default=16.0, validation_alias="WTM_SIGMA_X")
    sigma_y: float = Field(default=8.0, validation_alias="WTM_SIGMA_Y")
    circle_sigma: float = Field(default=8.0, validation_alias="WTM_CIRCLE_SIGMA")
    b: float = Field(default=10.0, validation_alias="WTM_B")
    c: float = Field(default=10.0, validation_alias="WTM_C")
    literal_abs_sum: bool = Field(default=False, validation_alias="WTM_LITERAL_ABS_SUM")
    counts: str = Field(
        default="10,45,80",
        validation_alias="WTM_COUNTS",
        description="Comma-separated template counts evaluated per eye.",
    )
    threshold: float = Field(default=8.0, validation_alias="WTM_THRESHOLD")
    kinds: str = Field(
        default=",".join(PRESET_NAMES),
        validation_alias="WTM_KINDS",
        description="Comma-separated weight-map preset names.",
    )
    template_width: int = Field(default=44, validation_alias="WTM_TEMPLATE_WIDTH")
    template_height: int = Field(default=22, validation_alias="WTM_TEMPLATE_HEIGHT")
    noise_sigma: float = Field(default=12.75, validation_alias="WTM_NOISE_SIGMA")

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, value: int) -> int:
        """Accept zero for every core or a positive pool size."""
        if value >= 0:
            return value
        raise ValueError("WTM_THREADS must be greater than or equal to 0")

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, value: int) -> int:
        """Require a 64-bit unsigned seed."""
        if 0 <= value < 2**64:
            return value
        raise ValueError("WTM_SEED must be between 0 and 2**64 - 1")

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value: str | None) -> str:
        """Accept standard logging level names in any case."""
        normalized = (value or "INFO").strip().upper()
        if normalized not in LOG_LEVELS:
            raise ValueError(f"WTM_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
        return normalized

    @field_validator("amplitude")
    @classmethod
    def validate_amplitude(cls, value: float) -> float:
        """Generated maps are clamped at 1, so smaller amplitudes are meaningless."""
        if value >= 1.0:
            return value
        raise ValueError("WTM_AMPLITUDE must be greater than or equal to 1")

    @field_validator("sigma_x", "sigma_y", "circle_sigma", "b", "c")
    @classmethod
    def validate_positive_spread(cls, value: float) -> float:
        """Require positive spreads and decay lengths."""
        if value > 0.0:
            return value
        raise ValueError("Gaussian sigmas and exponential decay lengths must be greater than 0")

    @field_validator("threshold")
    @classmethod
    def validate_threshold(cls, value: float) -> float:
        """Require a positive detection radius."""
        if value > 0.0:
            return value
        raise ValueError("WTM_THRESHOLD must be greater than 0")

    @field_validator("noise_sigma")
    @classmethod
    def validate_noise_sigma(cls, value: float) -> float:
        """Allow noise-free scenes."""
        if value >= 0.0:
            return value
        raise ValueError("WTM_NOISE_SIGMA must be greater than or equal to 0")

    @field_validator("template_width", "template_height")
    @classmethod
    def validate_template_size(cls, value: int) -> int:
        """Require a non-empty template dimension."""
        if value >= 1:
            return value
        raise ValueError("WTM_TEMPLATE_WIDTH and WTM_TEMPLATE_HEIGHT must be greater than or equal to 1")

    @field_validator("counts", mode="before")
    @classmethod
    def normalize_counts(cls, value: str | list[int] | None) -> str:
        """Require positive integer counts; stored as a canonical comma list."""
        items = [str(item) for item in value] if isinstance(value, list | tuple) else split_comma_separated(value)
        if not items or not all(item.isdigit() and int(item) >= 1 for item in items):
            raise ValueError("WTM_COUNTS must be a comma-separated list of positive integers")
        return ",".join(str(int(item)) for item in items)

    @field_validator("kinds", mode="before")
    @classmethod
    def normalize_kinds(cls, value: str | list[str] | None) -> str:
        """Require known weight-map preset names."""
        items = [str(item).strip() for item in value] if isinstance(value, list | tuple) else split_comma_separated(value)
        unknown = [item for item in items if item not in PRESET_NAMES]
        if not items or unknown:
            raise ValueError(f"WTM_KINDS must list presets from {', '.join(PRESET_NAMES)}")
        return ",".join(items)

    @property
    def count_list(self) -> tuple[int, ...]:
        """Parsed template counts."""
        return tuple(int(item) for item in split_comma_separated(self.counts))

    @property
    def kind_list(self) -> tuple[str, ...]:
        """Parsed preset names."""
        return tuple(split_comma_separated(self.kinds))

    def presets(self) -> dict[str, WeightMapSetting]:
        """Named weight-map settings built from the configured parameters."""
        return preset_settings(
            amplitude=self.amplitude,
            sigma_x=self.sigma_x,
            sigma_y=self.sigma_y,
            circle_sigma=self.circle_sigma,
            b=self.b,
            c=self.c,
            literal_abs_sum=self.literal_abs_sum,
        )

    def weight_settings(self) -> tuple[WeightMapSetting, ...]:
        """Configured presets in configured order."""
        return select_settings(self.kind_list, self.presets())


def load_settings(
    config_path: str | None = None,
    *,
    env_file: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> Settings:
    """Apply the optional TOML file to the environment, then build ``Settings``.

    Precedence is ``overrides`` (explicit flags; ``None`` values are ignored), then
    OS environment, then TOML ``[settings]``, then ``.env``, then defaults.

    Raises:
        OSError: The TOML file cannot be read.
        tomllib.TOMLDecodeError: The TOML file is invalid.
        ValueError: A setting is out of range.
    """
    config, source = read_runtime_config(config_path)
    applied = apply_settings_environment(config)
    if source is not None:
        logger.debug("applied %s from %s", ", ".join(applied) or "no settings", source)
    env_path = env_file or default_env_file()
    explicit = {str(Settings.model_fields[name].validation_alias): value for name, value in (overrides or {}).items() if value is not None}
    return Settings(_env_file=str(env_path) if env_path.is_file() else None, **explicit)
