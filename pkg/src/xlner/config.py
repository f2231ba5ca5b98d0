"""Plain-text key=value experiment configs and provenance records.

A config file holds one ``key = value`` pair per line, with ``#``
comments and blank lines ignored. Command-line flags override file
values. Every command writes a provenance JSON next to its primary
output: the merged config, its hash, the content hashes of all inputs,
the seed, and the toolkit version — and deliberately nothing
time-dependent, so re-running a command reproduces the record
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, TextIO

from ._version import VERSION
from .errors import ConfigError
from .network import Hyperparams

# Hyperparams fields and the parse applied to each when read from config.
_HYPER_FIELDS = {
    "word_dim": int,
    "char_dim": int,
    "char_hidden": int,
    "token_hidden": int,
    "dropout": float,
    "epochs": int,
    "learning_rate": float,
    "decay_rate": float,
    "momentum": float,
    "grad_clip": float,
    "input_mode": str,
    "seed": int,
}


def parse_config(text: str | TextIO | Iterable[str], source: str = "config") -> dict[str, str]:
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text
    values: dict[str, str] = {}
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {line_number}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}: line {line_number}: empty key")
        if key in values:
            raise ConfigError(f"{source}: line {line_number}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config(path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle, source=str(path))


def merge_config(base: dict[str, str], overrides: dict[str, object]) -> dict[str, str]:
    """Overlay non-None override values (stringified) onto a config dict."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = str(value)
    return merged


def require(config: dict[str, str], key: str) -> str:
    if key not in config or config[key] == "":
        raise ConfigError(f"missing required config key {key!r}")
    return config[key]


def get_str(config: dict[str, str], key: str, default: str | None = None) -> str | None:
    return config.get(key, default)


def get_int(config: dict[str, str], key: str, default: int | None = None) -> int | None:
    if key not in config:
        return default
    try:
        return int(config[key])
    except ValueError:
        raise ConfigError(f"config key {key!r} must be an integer, got {config[key]!r}")


def get_float(config: dict[str, str], key: str, default: float | None = None) -> float | None:
    if key not in config:
        return default
    try:
        return float(config[key])
    except ValueError:
        raise ConfigError(f"config key {key!r} must be a number, got {config[key]!r}")


def get_path(config: dict[str, str], key: str, required: bool = True) -> Path | None:
    value = require(config, key) if required else config.get(key)
    if value is None or value == "":
        return None
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"config key {key!r}: path does not exist: {path}")
    return path


def hyperparams_from_config(config: dict[str, str]) -> Hyperparams:
    """Build Hyperparams from config keys, leaving absent fields at their
    defaults. The seed has no default: every training config must set it."""
    kwargs = {}
    for name, parse in _HYPER_FIELDS.items():
        if name in config:
            try:
                kwargs[name] = parse(config[name])
            except ValueError:
                raise ConfigError(
                    f"config key {name!r} must be {parse.__name__}, got {config[name]!r}"
                )
    if "seed" not in kwargs:
        raise ConfigError("config key 'seed' is required (no wall-clock default)")
    hyper = Hyperparams(**kwargs)
    hyper.validate()
    return hyper


# ----------------------------------------------------------------------
# provenance


def config_hash(config: dict[str, str]) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def provenance_record(
    command: str,
    config: dict[str, str],
    inputs: dict[str, Path | str],
    outputs: Iterable[str] = (),
    seed: int | None = None,
) -> dict:
    return {
        "command": command,
        "config": dict(sorted(config.items())),
        "config_hash": config_hash(config),
        "inputs": {
            key: {"path": str(path), "sha256": file_sha256(path)}
            for key, path in sorted(inputs.items())
        },
        "outputs": sorted(str(o) for o in outputs),
        "seed": seed,
        "version": VERSION,
    }


def write_provenance(record: dict, output_path) -> Path:
    """Write ``<output>.provenance.json`` next to a primary output file."""
    path = Path(str(output_path) + ".provenance.json")
    path.write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return path
