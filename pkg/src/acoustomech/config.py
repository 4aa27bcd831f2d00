"""Configuration files and ``section.key=value`` overrides.

The file format is TOML with one table per parameter group::

    [magnet]
    R = 1e-7
    [drive]
    target_chi = 0.01
    b_g = 2e3
    [bath]
    T = 0.1          # shorthand for T_x = T_m = T_p
    Q_p = 1e6

Defaults are the reference spectrum parameters (R = 100 nm,
Q_x = 1e5, Q_p = 1e6, 300 K, chi = 1e-2).
"""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .model import BathParams, MagnetParams, SystemParams


class ConfigError(ValueError):
    pass


MAGNET_KEYS = tuple(f.name for f in dataclasses.fields(MagnetParams))
BATH_KEYS = tuple(f.name for f in dataclasses.fields(BathParams))
DRIVE_KEYS = ("target_chi", "b_g", "B0", "omega_d")
PARAM_KEYS = (tuple(f"magnet.{k}" for k in MAGNET_KEYS)
              + tuple(f"drive.{k}" for k in DRIVE_KEYS)
              + tuple(f"bath.{k}" for k in BATH_KEYS) + ("bath.T",))


def parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    try:
        return float(text)
    except ValueError:
        pass
    if "," in text:
        return [parse_value(t) for t in text.split(",")]
    return text


def flatten(params: SystemParams) -> dict:
    """Resolved parameter record as ``{"section.key": value}``."""
    out = {}
    for k in MAGNET_KEYS:
        out[f"magnet.{k}"] = getattr(params.magnet, k)
    drive = params.resolved_drive()
    out["drive.target_chi"] = params.target_chi
    out["drive.b_g"] = params.b_g
    out["drive.B0"] = drive.B0
    out["drive.omega_d"] = drive.omega_d
    for k in BATH_KEYS:
        out[f"bath.{k}"] = getattr(params.bath, k)
    return out


def apply_overrides(params: SystemParams, overrides: dict) -> SystemParams:
    """Return ``params`` with flattened ``section.key`` values replaced."""
    magnet, bath, top = {}, {}, {}
    for key, value in overrides.items():
        if key not in PARAM_KEYS:
            raise ConfigError(f"unknown parameter '{key}' (known: {', '.join(PARAM_KEYS)})")
        section, name = key.split(".", 1)
        if isinstance(value, str):
            raise ConfigError(f"parameter '{key}' needs a number, got '{value}'")
        if value is not None and not isinstance(value, bool):
            value = float(value)
            if not math.isfinite(value):
                raise ConfigError(f"parameter '{key}' must be finite")
        if section == "magnet":
            magnet[name] = value
        elif section == "bath" and name == "T":
            bath.update(T_x=value, T_m=value, T_p=value)
        elif section == "bath":
            bath[name] = value
        else:
            top[name] = value
    try:
        return dataclasses.replace(
            params,
            magnet=dataclasses.replace(params.magnet, **magnet),
            bath=dataclasses.replace(params.bath, **bath),
            **top,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"unphysical parameter: {exc}") from exc


def load_config(path) -> dict:
    """Read a TOML config; returns the raw nested mapping."""
    try:
        with open(Path(path), "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config '{path}': {exc}") from exc


def parameter_overrides(raw: dict) -> dict:
    """Flattened parameter keys from the magnet/drive/bath tables of a config."""
    flat = {}
    for section in ("magnet", "drive", "bath"):
        table = raw.get(section, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in table.items():
            flat[f"{section}.{key}"] = value
    return flat


def parse_set_options(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got '{item}'")
        key, value = item.split("=", 1)
        out[key.strip()] = parse_value(value)
    return out


def resolve(config_path=None, set_items=(), base: SystemParams | None = None):
    """Defaults, then the config file, then ``--set`` overrides.

    Returns ``(SystemParams, raw_config)``.
    """
    params = SystemParams() if base is None else base
    raw = load_config(config_path) if config_path else {}
    params = apply_overrides(params, parameter_overrides(raw))
    params = apply_overrides(params, parse_set_options(set_items))
    return params, raw
