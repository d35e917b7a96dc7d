"""Flat key=value experiment configuration files.

One `key = value` per line; `#` starts a comment; no sections or nesting.
Unknown keys are rejected to catch typos; missing keys fall back to the
defaults passed to the typed accessors.
"""

from __future__ import annotations

from ..exceptions import ConfigError

_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


class ExperimentConfig:
    def __init__(self, values: dict[str, str]):
        self._values = dict(values)

    @classmethod
    def parse(cls, text: str, known_keys: set[str] | None = None) -> "ExperimentConfig":
        values: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"line {lineno}: empty key")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            if known_keys is not None and key not in known_keys:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = value
        return cls(values)

    @classmethod
    def load(cls, path: str, known_keys: set[str] | None = None) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.parse(f.read(), known_keys=known_keys)

    def __contains__(self, key: str) -> bool:
        return key in self._values

    def keys(self):
        return self._values.keys()

    def get_str(self, key: str, default: str) -> str:
        return self._values.get(key, default)

    def get_int(self, key: str, default: int) -> int:
        if key not in self._values:
            return default
        try:
            return int(self._values[key])
        except ValueError:
            raise ConfigError(f"key {key!r}: expected integer, got {self._values[key]!r}") from None

    def get_float(self, key: str, default: float) -> float:
        if key not in self._values:
            return default
        try:
            return float(self._values[key])
        except ValueError:
            raise ConfigError(f"key {key!r}: expected number, got {self._values[key]!r}") from None

    def get_bool(self, key: str, default: bool) -> bool:
        if key not in self._values:
            return default
        value = self._values[key].lower()
        if value not in _BOOL_VALUES:
            raise ConfigError(f"key {key!r}: expected boolean, got {self._values[key]!r}")
        return _BOOL_VALUES[value]

    def get_int_list(self, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
        if key not in self._values:
            return tuple(default)
        raw = self._values[key]
        try:
            return tuple(int(part.strip()) for part in raw.split(",") if part.strip())
        except ValueError:
            raise ConfigError(
                f"key {key!r}: expected comma-separated integers, got {raw!r}"
            ) from None
