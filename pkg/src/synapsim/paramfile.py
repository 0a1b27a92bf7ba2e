"""Parameter files and ``key=value`` override handling for the CLI.

Grammar: one ``key = value`` pair per line, ``#`` starts a comment
(whole-line or trailing), blank lines ignored.  Values use the same
SI-suffixed number grammar as netlists (``10n``, ``2meg``, ``1e-3``),
plus booleans and bare strings.  Keys may carry a dotted scope prefix
(``mos.l = 10n``); unscoped keys go to the subcommand's primary scope.
"""

from __future__ import annotations

import dataclasses
import types
import typing

from .engine import parse_number

__all__ = ["ParamError", "load_params", "parse_assignments", "split_scopes",
           "apply_params", "coerce_value"]

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}

_int_or_float = object()     # sentinel: numeric tuple element of unknown kind


class ParamError(ValueError):
    """Malformed parameter file, override, or unknown/ill-typed key."""


def _parse_line(line: str, where: str) -> tuple[str, str] | None:
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    if "=" not in text:
        raise ParamError(f"{where}: expected key=value, got {text!r}")
    key, _, raw = text.partition("=")
    key, raw = key.strip(), raw.strip()
    if not key or not raw:
        raise ParamError(f"{where}: empty key or value in {text!r}")
    return key, raw


def load_params(path) -> dict:
    """Read a parameter file into an ordered {key: raw-string} mapping."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            pair = _parse_line(line, f"{path}:{lineno}")
            if pair:
                out[pair[0]] = pair[1]
    return out


def parse_assignments(pairs) -> dict:
    """Parse repeated ``--set key=value`` strings (later wins)."""
    out: dict[str, str] = {}
    for item in pairs or ():
        pair = _parse_line(item, f"--set {item!r}")
        if pair is None:
            raise ParamError(f"--set {item!r}: empty assignment")
        out[pair[0]] = pair[1]
    return out


def split_scopes(mapping: dict, scopes) -> dict:
    """Split dotted keys into per-scope mappings; unscoped keys land in ''."""
    out: dict[str, dict] = {"": {}}
    out.update({s: {} for s in scopes})
    for key, raw in mapping.items():
        scope, dot, rest = key.partition(".")
        if dot and scope in out:
            out[scope][rest] = raw
        elif dot:
            raise ParamError(f"unknown parameter scope {scope!r} in {key!r} "
                             f"(expected one of {sorted(s for s in scopes)})")
        else:
            out[""][key] = raw
    return out


def coerce_value(raw: str, pytype):
    """Coerce a raw string to the dataclass field's annotated type."""
    if pytype is bool:
        word = raw.lower()
        if word not in _BOOL_WORDS:
            raise ParamError(f"expected a boolean, got {raw!r}")
        return _BOOL_WORDS[word]
    if pytype is int:
        return int(round(parse_number(raw)))
    if pytype is float:
        return float(parse_number(raw))
    if pytype is str:
        return raw
    if pytype is tuple or typing.get_origin(pytype) is tuple:
        args = [a for a in typing.get_args(pytype) if a is not Ellipsis]
        elem = args[0] if args else None
        return tuple(coerce_value(part.strip(), elem or _int_or_float)
                     for part in raw.split(",") if part.strip())
    if pytype is _int_or_float:
        num = parse_number(raw)
        return int(num) if float(num).is_integer() else float(num)
    raise ParamError(f"unsupported parameter type {pytype!r}")


def apply_params(obj, mapping: dict):
    """Return a dataclass copy with string-valued overrides applied.

    Unknown keys and uncoercible values raise ParamError.  Fields whose
    dataclass metadata or post-init fill derived values re-derive them
    through the class's own __post_init__ (dataclasses.replace).
    """
    if not mapping:
        return obj
    fields = {f.name: f for f in dataclasses.fields(obj) if f.init}
    hints = typing.get_type_hints(type(obj))
    kw = {}
    for key, raw in mapping.items():
        if key not in fields:
            raise ParamError(f"{type(obj).__name__} has no parameter {key!r} "
                             f"(known: {', '.join(sorted(fields))})")
        pytype = hints.get(key, float)
        origin = typing.get_origin(pytype)
        if origin is typing.Union or origin is getattr(types, "UnionType", None):
            args = [a for a in typing.get_args(pytype) if a is not type(None)]
            pytype = args[0] if args else float
        try:
            kw[key] = coerce_value(raw, pytype)
        except ParamError:
            raise
        except (ValueError, TypeError) as exc:
            raise ParamError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    try:
        return dataclasses.replace(obj, **kw)
    except (ValueError, TypeError) as exc:
        raise ParamError(str(exc)) from exc
