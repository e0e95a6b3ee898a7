"""INI-style configuration with line-anchored error messages."""

from __future__ import annotations

import configparser
import re
from pathlib import Path

_MISSING = object()
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


class ConfigError(ValueError):
    pass


class Config:
    """Read-only view of an INI file that remembers where every key lives."""

    def __init__(self, text: str, source: str = "<config>"):
        self.source = source
        self._parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        try:
            self._parser.read_string(text, source=source)
        except configparser.Error as exc:
            line = getattr(exc, "lineno", None)
            msg = str(exc).splitlines()[0]
            errors = getattr(exc, "errors", None)
            if errors:
                line = errors[0][0]
                msg = f"cannot parse line {errors[0][1]}"

            raise ConfigError(f"{source}:{line or 1}: {msg}") from None
        self._section_lines: dict[str, int] = {}
        self._key_lines: dict[tuple[str, str], int] = {}
        section = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            m = _SECTION_RE.match(line)
            if m:
                section = m.group(1).strip()
                self._section_lines[section] = lineno
                continue
            m = _KEY_RE.match(line)
            if m and section is not None:
                self._key_lines[(section, m.group(1).strip().lower())] = lineno

    @classmethod
    def from_path(cls, path: str | Path) -> Config:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}:0: cannot read config ({exc.strerror})") from None
        return cls(text, str(path))

    def has_section(self, section: str) -> bool:
        return self._parser.has_section(section)

    def keys(self, section: str) -> list[str]:
        return list(self._parser[section]) if self.has_section(section) else []

    def error(self, section: str, key: str | None, message: str) -> ConfigError:
        line = self._key_lines.get((section, key)) if key else None
        if line is None:
            line = self._section_lines.get(section, 1)
        return ConfigError(f"{self.source}:{line}: [{section}] {message}")

    def require_section(self, section: str):
        if not self.has_section(section):
            raise ConfigError(f"{self.source}:1: missing section [{section}]")

    def _raw(self, section: str, key: str, default):
        if not self.has_section(section):
            if default is _MISSING:
                raise ConfigError(f"{self.source}:1: missing section [{section}] (needed for key {key!r})")
            return None
        if key not in self._parser[section]:
            if default is _MISSING:
                raise self.error(section, None, f"missing required key {key!r}")
            return None
        return self._parser[section][key].strip()

    def get_str(self, section: str, key: str, default=_MISSING):
        raw = self._raw(section, key, default)
        return default if raw is None else raw

    def get_float(self, section: str, key: str, default=_MISSING):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise self.error(section, key, f"{key} = {raw!r} is not a number") from None

    def get_int(self, section: str, key: str, default=_MISSING):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise self.error(section, key, f"{key} = {raw!r} is not an integer") from None

    def get_bool(self, section: str, key: str, default=_MISSING):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        value = raw.lower()
        if value in ("1", "true", "yes", "on"):
            return True
        if value in ("0", "false", "no", "off"):
            return False
        raise self.error(section, key, f"{key} = {raw!r} is not a boolean")

    def get_int_tuple(self, section: str, key: str, default=_MISSING):
        """Comma-separated integers, e.g. ``1,0``."""
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return tuple(int(x) for x in raw.split(","))
        except ValueError:
            raise self.error(section, key, f"{key} = {raw!r} is not a comma-separated integer list") from None

    def get_int_tuples(self, section: str, key: str, default=_MISSING):
        """Semicolon-separated integer tuples, e.g. ``1,0; 0,2``."""
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return [tuple(int(x) for x in part.split(",")) for part in raw.split(";") if part.strip()]
        except ValueError:
            raise self.error(section, key, f"{key} = {raw!r} is not a list of integer tuples") from None
