"""
Configuration for the co-prime matrix toolkit.
Settings come from the environment (optionally seeded from a .env file);
simulation scenarios come from YAML or JSON files.
"""

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import find_dotenv, load_dotenv

from utils.errors import ConfigError
from utils.family_builder import FEASIBLE_KINDS

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("json", "text")


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults; command-line flags override each field."""

    log_level: str = "WARNING"
    seed: Optional[int] = None
    output_format: str = "json"
    oracle: bool = False
    threshold_ratio: float = 0.5
    svg_scale: int = 40


@dataclass(frozen=True)
class SceneConfig:
    """A simulation scenario: the harmonic scene plus the family that samples it."""

    amplitude: complex
    frequency: List[int]
    noise_sigma: float
    seed: int
    dim: int
    qs: List[int]
    kind: str = "cyclic"
    perms: Optional[List[List[int]]] = None
    trials: int = 0


def _env_bool(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


def _env_int(value: Optional[str]) -> Optional[int]:
    return int(value) if value not in (None, "") else None


def load_settings(env_file: Optional[Union[str, Path]] = None) -> Settings:
    """
    Build Settings from the environment.

    Args:
        env_file: Optional .env file; when omitted python-dotenv searches
            the working directory. Existing environment variables win.

    Returns:
        Validated Settings
    """
    load_dotenv(dotenv_path=env_file or find_dotenv(usecwd=True), override=False)

    try:
        settings = Settings(
            log_level=os.getenv("COPRIME_LOG_LEVEL", "WARNING").upper(),
            seed=_env_int(os.getenv("COPRIME_SEED")),
            output_format=os.getenv("COPRIME_FORMAT", "json").lower(),
            oracle=_env_bool(os.getenv("COPRIME_ORACLE", "false")),
            threshold_ratio=float(os.getenv("COPRIME_THRESHOLD", "0.5")),
            svg_scale=int(os.getenv("COPRIME_SVG_SCALE", "40")),
        )
    except ValueError as e:
        raise ConfigError(f"Invalid environment configuration: {e}") from e

    if settings.output_format not in OUTPUT_FORMATS:
        raise ConfigError(f"COPRIME_FORMAT must be one of {OUTPUT_FORMATS}")
    if not 0 < settings.threshold_ratio <= 1:
        raise ConfigError("COPRIME_THRESHOLD must lie in (0, 1]")
    if settings.svg_scale <= 0:
        raise ConfigError("COPRIME_SVG_SCALE must be positive")

    logger.debug(f"Loaded settings: {settings}")
    return settings


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the process-wide Settings instance."""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def reset_settings() -> None:
    """Forget cached settings (tests change the environment between cases)."""
    global _settings
    _settings = None


def _parse_complex(value: Any) -> complex:
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(value)


def parse_scene_config(document: Dict[str, Any]) -> SceneConfig:
    """Validate a decoded scenario document."""
    if not isinstance(document, dict):
        raise ConfigError("Scenario must be a mapping")

    scene = document.get("scene", {})
    family = document.get("family", {})
    if not isinstance(scene, dict) or not isinstance(family, dict):
        raise ConfigError("Scenario needs 'scene' and 'family' mappings")

    try:
        frequency = [int(v) for v in scene["frequency"]]
        dim = int(family.get("dim", len(frequency)))
        qs = [int(q) for q in family["qs"]]
        config = SceneConfig(
            amplitude=_parse_complex(scene.get("amplitude", 1.0)),
            frequency=frequency,
            noise_sigma=float(scene.get("noise_sigma", 0.0)),
            seed=int(scene.get("seed", 0)),
            dim=dim,
            qs=qs,
            kind=str(family.get("kind", "cyclic")),
            perms=family.get("perms"),
            trials=int(document.get("trials", 0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid scenario: {e}") from e

    if len(config.frequency) != config.dim:
        raise ConfigError(f"Frequency has {len(config.frequency)} components, expected {config.dim}")
    if config.kind not in FEASIBLE_KINDS:
        raise ConfigError(f"Unknown feasible-set kind: {config.kind}")
    if config.kind == "explicit" and not config.perms:
        raise ConfigError("Explicit feasible sets need a 'perms' list")
    if config.noise_sigma < 0:
        raise ConfigError("noise_sigma must be nonnegative")
    if config.amplitude == 0:
        raise ConfigError("amplitude must be nonzero")

    return config


def load_scene_config(path: Union[str, Path]) -> SceneConfig:
    """Load a scenario from a .yaml/.yml or .json file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read scenario file {path}: {e}") from e

    try:
        if path.suffix.lower() == ".json":
            document = json.loads(text)
        else:
            document = yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError(f"Malformed scenario file {path}: {e}") from e

    logger.info(f"Loaded scenario from {path}")
    return parse_scene_config(document)
