"""
config.py
Settings for the ssmi command. Defaults, then ssmi.toml, then the
environment (.env is loaded first); command-line flags win over all three.

    [compile]
    xlsx = "out.xlsx"
    json = "out.wbjson"
    strict = false

    [layout]
    first_block_row = 3

    [audit]
    strict = false
    format = "text"
"""

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from core.model import SsmiError

load_dotenv()

logger = logging.getLogger(__name__)

SSMI_CONFIG    = os.getenv("SSMI_CONFIG", "ssmi.toml")
SSMI_STRICT    = os.getenv("SSMI_STRICT", "0")
SSMI_LOG_LEVEL = os.getenv("SSMI_LOG_LEVEL", "WARNING")


class ConfigError(SsmiError):
    pass


@dataclass(frozen=True)
class Settings:
    compile_xlsx: Optional[str] = None
    compile_json: Optional[str] = None
    compile_strict: bool = False
    first_block_row: int = 3
    audit_strict: bool = False
    audit_format: str = "text"


# toml section -> key -> Settings field
_TOML_KEYS = {
    "compile": {"xlsx": "compile_xlsx", "json": "compile_json", "strict": "compile_strict"},
    "layout": {"first_block_row": "first_block_row"},
    "audit": {"strict": "audit_strict", "format": "audit_format"},
}


def _truthy(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


def _from_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    types = {f.name: f.type for f in fields(Settings)}
    values = {}
    for section, body in data.items():
        known = _TOML_KEYS.get(section)
        if known is None or not isinstance(body, dict):
            logger.warning("%s: ignoring unknown section [%s]", path, section)
            continue
        for key, value in body.items():
            if key not in known:
                logger.warning("%s: ignoring unknown key %s.%s", path, section, key)
                continue
            target = known[key]
            expected = types[target] if types[target] in (bool, int) else str
            if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
                raise ConfigError(f"{path}: {section}.{key} must be {expected.__name__}")
            values[target] = value

    if values.get("audit_format", "text") not in ("text", "json"):
        raise ConfigError(f"{path}: audit.format must be 'text' or 'json'")
    if values.get("first_block_row", 3) < 3:
        raise ConfigError(f"{path}: layout.first_block_row must be at least 3")
    return values


def load_settings(path: Optional[str] = None) -> Settings:
    """Defaults < toml file (if present) < SSMI_STRICT from the environment."""
    settings = Settings()
    toml_path = Path(path or SSMI_CONFIG)
    if toml_path.is_file():
        settings = replace(settings, **_from_toml(toml_path))
        logger.info("settings loaded from %s", toml_path)
    elif path is not None:
        raise ConfigError(f"config file {path} not found")

    strict = os.getenv("SSMI_STRICT", SSMI_STRICT)
    if _truthy(strict):
        settings = replace(settings, compile_strict=True, audit_strict=True)
    return settings
