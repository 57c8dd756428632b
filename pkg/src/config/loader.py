#!/usr/bin/env python3
"""
TOML loading with line diagnostics

Experiment configs and system definitions are TOML files. Parse errors and
validation errors are reported as ConfigError with the offending line number.
"""

import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from koopman.errors import ConfigError

logger = logging.getLogger(__name__)

_DECODE_LINE = re.compile(r"line (\d+)")


def load_toml(path) -> Tuple[Dict[str, Any], str]:
    """
    Read and parse a TOML file.

    Returns:
        Tuple of (parsed mapping, raw text) so callers can locate keys later
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}")
    return parse_toml(text, str(path)), text


def parse_toml(text: str, source: str = "<string>") -> Dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _DECODE_LINE.search(str(e))
        line = int(match.group(1)) if match else None
        raise ConfigError(f"{source}: {e}", line=line)


def key_line(text: Optional[str], key: str) -> Optional[int]:
    """1-based line of the first assignment to `key`, or None"""
    if not text:
        return None
    leaf = key.split(".")[-1]
    pattern = re.compile(rf"^\s*{re.escape(leaf)}\s*=")
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return number
    return None


def require(mapping: Dict[str, Any], key: str, section: str = "") -> Any:
    if key not in mapping:
        where = f"[{section}] " if section else ""
        raise ConfigError(f"{where}missing required key '{key}'")
    return mapping[key]


def fail(message: str, text: Optional[str], key: str) -> ConfigError:
    return ConfigError(message, line=key_line(text, key))
