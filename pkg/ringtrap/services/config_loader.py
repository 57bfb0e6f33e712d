"""Reads YAML run configurations, validates them against the schema
and normalizes every physical quantity to SI units.
"""

import copy
import hashlib
import math
import numpy as np
import yaml
from logging import Logger
from ringtrap.constants import (
    ANGLE_UNITS,
    COMMANDS,
    FREQUENCY_UNITS,
    LENGTH_UNITS,
    POWER_UNITS,
    SCHEMA_VERSION,
    TEMPERATURE_UNITS
)
from ringtrap.models.config import (
    ANGLE,
    FREQUENCY,
    FieldSpec,
    LENGTH,
    POWER,
    RunConfig,
    SCHEMA,
    TEMPERATURE
)
from ringtrap.models.errors import ConfigError
from typing import Any, Dict, List, Optional, Tuple
from yaml.loader import FullLoader

UNIT_FAMILIES = {
    LENGTH: LENGTH_UNITS,
    FREQUENCY: FREQUENCY_UNITS,
    POWER: POWER_UNITS,
    TEMPERATURE: TEMPERATURE_UNITS,
    ANGLE: ANGLE_UNITS,
}
ALL_SUFFIXES = {s for units in UNIT_FAMILIES.values() for s in units}


def load_config(fpath: str, logger: Optional[Logger] = None) -> RunConfig:
    """Loads and validates a run configuration file.

    Args:
        fpath (str): Path to a UTF-8 YAML file.

        logger (`Logger`): Optional logger for progress messages.

    Returns:
        (`RunConfig`): The validated, SI-normalized configuration.

    Raises:
        `ConfigError`: The file is unreadable or fails validation.
    """
    try:
        with open(fpath, "r", encoding="utf-8") as stream:
            text = stream.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"Failed to read configuration file '{fpath}'. {e}")

    if logger:
        logger.info(f"Parsing configuration file '{fpath}'.")
    config = parse_config(text)
    return RunConfig(
        command=config.command,
        schema_version=config.schema_version,
        sections=config.sections,
        config_hash=config.config_hash,
        source_path=str(fpath))


def parse_config(text: str) -> RunConfig:
    """Validates configuration text.

    Args:
        text (str): YAML document.

    Returns:
        (`RunConfig`): The normalized configuration.
    """
    try:
        raw = yaml.load(text, Loader=FullLoader)
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse configuration. {e}")
    if not isinstance(raw, dict):
        raise ConfigError("Configuration must be a mapping of sections.")

    for key in raw:
        if key not in ("schema_version", "command") and key not in SCHEMA:
            raise ConfigError("Unknown key.", key_path=str(key))

    version = raw.get("schema_version")
    if version is None:
        raise ConfigError("Missing required key.", key_path="schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"Unsupported schema version {version}; expected {SCHEMA_VERSION}.",
            key_path="schema_version")

    command = raw.get("command")
    if command is None:
        raise ConfigError("Missing required key.", key_path="command")
    if command not in COMMANDS:
        raise ConfigError(
            f"Unknown command '{command}'. Expected one of {', '.join(COMMANDS)}.",
            key_path="command")

    sections = {}
    for name, schema in SCHEMA.items():
        section = raw.get(name) or {}
        if not isinstance(section, dict):
            raise ConfigError("Section must be a mapping.", key_path=name)
        sections[name] = _normalize_section(section, schema, name, command)

    config_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return RunConfig(command, version, sections, config_hash)


def _normalize_section(
    section: Dict[str, Any],
    schema: Dict[str, FieldSpec],
    path: str,
    command: str) -> Dict[str, Any]:
    """Validates one mapping and fills in its defaults.
    """
    values = {}
    for key, raw_value in section.items():
        stem, suffix = _match_key(str(key), schema, f"{path}.{key}")
        if stem in values:
            raise ConfigError("Key given more than once.", key_path=f"{path}.{key}")
        values[stem] = _normalize_value(raw_value, schema[stem], suffix, f"{path}.{key}", command)

    for stem, spec in schema.items():
        if stem in values:
            continue
        if command in spec.required_for or "*" in spec.required_for:
            raise ConfigError(
                f"Missing required key{_suffix_hint(spec)}.",
                key_path=f"{path}.{stem}")
        values[stem] = copy.deepcopy(spec.default)
    return values


def _match_key(key: str, schema: Dict[str, FieldSpec], key_path: str) -> Tuple[str, Optional[str]]:
    """Splits a key into its schema stem and unit suffix.
    """
    spec = schema.get(key)
    if spec is not None:
        if spec.family is not None:
            raise ConfigError(f"Missing unit suffix{_suffix_hint(spec)}.", key_path=key_path)
        return key, None

    for stem in sorted(schema, key=len, reverse=True):
        spec = schema[stem]
        if spec.family is None or not key.startswith(f"{stem}_"):
            continue
        suffix = key[len(stem) + 1:]
        if suffix in UNIT_FAMILIES[spec.family]:
            return stem, suffix
        if suffix in ALL_SUFFIXES:
            raise ConfigError(
                f"Unit suffix '_{suffix}' is not a {spec.family} unit{_suffix_hint(spec)}.",
                key_path=key_path)
        raise ConfigError(f"Unknown unit suffix '_{suffix}'{_suffix_hint(spec)}.", key_path=key_path)

    raise ConfigError("Unknown key.", key_path=key_path)


def _suffix_hint(spec: FieldSpec) -> str:
    if spec.family is None:
        return ""
    suffixes = ", ".join(f"_{s}" for s in UNIT_FAMILIES[spec.family])
    return f" (expects a {spec.family} suffix: {suffixes})"


def _normalize_value(
    value: Any,
    spec: FieldSpec,
    suffix: Optional[str],
    key_path: str,
    command: str) -> Any:
    """Converts one value to SI and checks its sign and type.
    """
    if spec.item_schema is not None:
        if not isinstance(value, list):
            raise ConfigError("Expected a list of mappings.", key_path=key_path)
        items = []
        for i, item in enumerate(value):
            if not isinstance(item, dict):
                raise ConfigError("Expected a mapping.", key_path=f"{key_path}[{i}]")
            items.append(_normalize_section(item, spec.item_schema, f"{key_path}[{i}]", command))
        return items

    if spec.allow_range and isinstance(value, (list, dict)):
        return [
            _normalize_scalar(v, spec, suffix, key_path)
            for v in _expand_range(value, key_path)
        ]
    return _normalize_scalar(value, spec, suffix, key_path)


def _expand_range(value: Any, key_path: str) -> List[Any]:
    """Expands a list or {start, stop, step} mapping into its values.

    The stop value is included when it falls on the step grid.
    """
    if isinstance(value, list):
        if not value:
            raise ConfigError("Range must not be empty.", key_path=key_path)
        return value
    unknown = set(value) - {"start", "stop", "step"}
    if unknown:
        raise ConfigError(f"Unknown range keys {sorted(unknown)}.", key_path=key_path)
    try:
        start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
    except KeyError as e:
        raise ConfigError(f"Range is missing {e}.", key_path=key_path)
    except (TypeError, ValueError):
        raise ConfigError("Range bounds must be numbers.", key_path=key_path)
    if step <= 0 or stop < start:
        raise ConfigError("Range needs step > 0 and stop >= start.", key_path=key_path)
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(v) for v in start + step * np.arange(count)]


def _normalize_scalar(value: Any, spec: FieldSpec, suffix: Optional[str], key_path: str) -> Any:
    if spec.kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("Expected true or false.", key_path=key_path)
        return value
    if spec.kind is str:
        if not isinstance(value, str):
            raise ConfigError("Expected a string.", key_path=key_path)
        if spec.choices and value not in spec.choices:
            raise ConfigError(
                f"Expected one of {', '.join(map(str, spec.choices))}.", key_path=key_path)
        return value

    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("Expected a number.", key_path=key_path)
    if spec.kind is int:
        if not float(value).is_integer():
            raise ConfigError("Expected an integer.", key_path=key_path)
        value = int(value)
    else:
        value = float(value)
    if not math.isfinite(value):
        raise ConfigError("Expected a finite number.", key_path=key_path)
    if spec.choices and value not in spec.choices:
        raise ConfigError(
            f"Expected one of {', '.join(map(str, spec.choices))}.", key_path=key_path)
    if value < 0 and not spec.allow_negative:
        raise ConfigError("Must be positive.", key_path=key_path)
    if value == 0 and not (spec.allow_zero or spec.allow_negative):
        raise ConfigError("Must be positive.", key_path=key_path)

    if spec.family is None:
        return value
    si = value * UNIT_FAMILIES[spec.family][suffix]
    if spec.family == FREQUENCY:
        si *= 2 * math.pi
    return si


if __name__ == "__main__":
    from ringtrap.constants import BASELINE_CONFIG_FPATH
    from ringtrap.services.logger import LoggerFactory
    logger = LoggerFactory.get("config-loader")
    config = load_config(BASELINE_CONFIG_FPATH, logger)
    logger.info(f"Loaded '{config.command}' configuration {config.config_hash[:12]}.")
    logger.info(config.geometry())
