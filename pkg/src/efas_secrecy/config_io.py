"""Strict TOML configuration files for :class:`SystemConfig`.

Every top-level key is a ``SystemConfig`` field; omitted keys keep their
defaults.  Power may be given linearly (``P``) or in dB (``P_dB``), but not
both.  The routing gain is either a number (a point mass) or a table::

    [beta_b]
    kind = "uniform"
    low = 2.0
    high = 8.0

Matrices ``C``, ``R_b`` and ``R_e`` are nested lists of reals, or a table
with ``real`` and ``imag`` nested lists; omission means the identity.
"""

from __future__ import annotations

import dataclasses
import re
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from .channel_model import (
    MATRIX_FIELDS,
    RoutingGainDistribution,
    SystemConfig,
    db_to_linear,
    validate_config,
)
from .errors import ConfigParseError, ConfigValidationError

__all__ = ["CONFIG_KEYS", "config_to_dict", "parse_config", "parse_config_text", "serialize_config"]

_INT_FIELDS = ("M", "Tc", "tau_p", "seed")
_FLOAT_FIELDS = ("rho_p", "sigma2", "P", "alpha", "R_th", "rho", "beta_e")
_STR_FIELDS = ("beta_e_mode", "variance_mode")
CONFIG_KEYS = _INT_FIELDS + _FLOAT_FIELDS + _STR_FIELDS + ("P_dB", "beta_b", "beta_e_set") + MATRIX_FIELDS
_ROUTING_KEYS = {"point-mass": ("value",), "uniform": ("low", "high"), "gamma": ("shape", "scale"),
                 "lognormal": ("mu", "sigma")}


def _line_of(text: str, key: str, table: str | None = None) -> int | None:
    """Best-effort line number of ``key = ...`` (or ``[key]``) in ``text``."""
    pat_key = re.compile(rf"^\s*{re.escape(key)}\s*=")
    pat_tab = re.compile(rf"^\s*\[\s*{re.escape(key)}\s*\]")
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"^\s*\[\s*([^\]]+?)\s*\]", line)
        if m:
            current = m.group(1)
            if table is None and pat_tab.match(line):
                return i
            continue
        if current == table and pat_key.match(line):
            return i
    return None


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _matrix(value, name: str):
    if isinstance(value, dict):
        extra = set(value) - {"real", "imag"}
        if extra or "real" not in value:
            raise ValueError("matrix table needs 'real' and optionally 'imag'")
        re_part = np.asarray(value["real"], dtype=float)
        im_part = np.asarray(value.get("imag", np.zeros_like(re_part)), dtype=float)
        if re_part.shape != im_part.shape:
            raise ValueError("real and imag parts differ in shape")
        return re_part + 1j * im_part
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError("must be a nested list (a 2-D matrix)")
    return arr.astype(complex)


def _routing(value) -> RoutingGainDistribution:
    if _is_number(value):
        return RoutingGainDistribution.point_mass(float(value))
    if not isinstance(value, dict):
        raise ValueError("must be a number or a table with 'kind'")
    kind = value.get("kind", "point-mass")
    if kind not in _ROUTING_KEYS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(_ROUTING_KEYS)}")
    allowed = set(_ROUTING_KEYS[kind]) | {"kind", "note"}
    extra = sorted(set(value) - allowed)
    if extra:
        raise ValueError(f"unknown keys {extra} for kind {kind!r}")
    missing = sorted(set(_ROUTING_KEYS[kind]) - set(value))
    if missing:
        raise ValueError(f"missing keys {missing} for kind {kind!r}")
    params = {}
    for k in _ROUTING_KEYS[kind]:
        if not _is_number(value[k]):
            raise ValueError(f"{k} must be a number")
        params[k] = float(value[k])
    return RoutingGainDistribution(kind, params, str(value.get("note", "")))


def parse_config_text(text: str, path: str | None = None) -> SystemConfig:
    """Parse TOML text into a validated :class:`SystemConfig`.

    Raises
    ------
    ConfigParseError
        Syntax errors, unknown keys, type mismatches and invariant
        violations, each with its line number when one can be located.
    """
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigParseError([("<syntax>", str(exc))], [int(m.group(1)) if m else None], path) from exc

    errs, lines = [], []

    def fail(key, msg, table=None):
        errs.append((key, msg))
        lines.append(_line_of(text, key, table))

    kwargs = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            fail(key, f"unknown key; allowed keys are {', '.join(CONFIG_KEYS)}")
        elif key in _INT_FIELDS:
            if _is_int(value):
                kwargs[key] = value
            else:
                fail(key, f"expected an integer, got {type(value).__name__}")
        elif key in _FLOAT_FIELDS or key == "P_dB":
            if _is_number(value):
                kwargs[key] = float(value)
            else:
                fail(key, f"expected a number, got {type(value).__name__}")
        elif key in _STR_FIELDS:
            if isinstance(value, str):
                kwargs[key] = value
            else:
                fail(key, f"expected a string, got {type(value).__name__}")
        elif key == "beta_e_set":
            if isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value):
                kwargs[key] = (float(value[0]), float(value[1]))
            else:
                fail(key, "expected a pair of numbers [min, max]")
        elif key == "beta_b":
            try:
                kwargs["beta_b_dist"] = _routing(value)
            except ValueError as exc:
                fail(key, str(exc))
        else:
            try:
                kwargs[key] = _matrix(value, key)
            except (ValueError, TypeError) as exc:
                fail(key, str(exc))
    if "P" in kwargs and "P_dB" in kwargs:
        fail("P_dB", "give either P or P_dB, not both")
    elif "P_dB" in kwargs:
        kwargs["P"] = float(db_to_linear(kwargs.pop("P_dB")))
    if errs:
        raise ConfigParseError(errs, lines, path)

    try:
        return validate_config(SystemConfig(**kwargs))
    except ConfigValidationError as exc:
        located = []
        for field, _ in exc.errors:
            base = field.split(".")[0]
            table_key = field.split(".")[1] if "." in field else None
            line = _line_of(text, table_key, base) if table_key else _line_of(text, base)
            if line is None and base == "beta_b_dist":
                line = _line_of(text, "beta_b")
            located.append(line)
        raise ConfigParseError(exc.errors, located, path) from exc


def parse_config(path) -> SystemConfig:
    """Read a UTF-8 TOML file; an empty file yields the default configuration."""
    p = Path(path)
    if not p.is_file():
        raise ConfigParseError([("<file>", f"no such file: {p}")], [None], str(p))
    return parse_config_text(p.read_text(encoding="utf-8"), str(p))


def _matrix_out(m):
    m = np.asarray(m, dtype=complex)
    if np.all(m.imag == 0):
        return m.real.tolist()
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def config_to_dict(cfg: SystemConfig) -> dict:
    """Plain-data view of a configuration, matching the file schema."""
    cfg = validate_config(cfg)
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in MATRIX_FIELDS:
            if v is not None:
                out[f.name] = _matrix_out(v)
        elif f.name == "beta_b_dist":
            table = {"kind": v.kind, **{k: float(x) for k, x in v.params.items()}}
            if v.note:
                table["note"] = v.note
            out["beta_b"] = table
        elif f.name == "beta_e_set":
            out[f.name] = [float(x) for x in v]
        else:
            out[f.name] = v
    return out


def serialize_config(cfg: SystemConfig) -> str:
    """TOML text that :func:`parse_config_text` maps back to an equal configuration."""
    return tomli_w.dumps(config_to_dict(cfg))
