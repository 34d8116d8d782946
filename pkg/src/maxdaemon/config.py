"""Flat typed config files.

One ``key = value`` pair per line, ``#`` starts a comment.  Keys are the
field names of the run schema; values are parsed by the declared type:

    int, float   plain literals or arithmetic with pi, e.g. ``pi/4``, ``1/100``
    complex      ``2``, ``1+0.5j``
    bool         true/false/yes/no/1/0
    str          bare text
    floats       comma-separated floats, e.g. ``pi, 2*pi, 3*pi``
    opt_float    a float or ``none``

Errors carry the file name and line number.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval_number(text: str) -> complex:
    """Arithmetic over numeric literals and pi; nothing else is allowed."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) and not isinstance(
            node.value, bool
        ):
            return node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval").body)
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc


def _as_float(text):
    v = _eval_number(text)
    if isinstance(v, complex):
        raise ValueError(f"expected a real number, got {text!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def _as_int(text):
    v = _eval_number(text)
    if isinstance(v, complex) or float(v) != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _as_complex(text):
    return complex(_eval_number(text))


def _as_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _as_floats(text):
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(_as_float(p) for p in parts)


def _as_opt_float(text):
    return None if text.strip().lower() in ("none", "") else _as_float(text)


PARSERS = {
    "int": _as_int,
    "float": _as_float,
    "complex": _as_complex,
    "bool": _as_bool,
    "str": lambda t: t.strip(),
    "floats": _as_floats,
    "opt_float": _as_opt_float,
}


@dataclass(frozen=True)
class Key:
    kind: str
    default: object
    choices: tuple = ()


def parse_text(text: str, schema: dict, source: str = "<config>") -> dict:
    """Parse config text against a schema {name: Key}; returns defaults merged with values."""
    out = {k: v.default for k, v in schema.items()}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "command":
            out["command"] = value
            continue
        if key not in schema:
            known = ", ".join(sorted(schema))
            raise ConfigError(f"{where}: unknown key {key!r} (known: {known})")
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {seen[key]})")
        spec = schema[key]
        try:
            val = PARSERS[spec.kind](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key} ({spec.kind}): {exc}") from None
        if spec.choices and val not in spec.choices:
            raise ConfigError(f"{where}: {key} must be one of {', '.join(spec.choices)}, got {val!r}")
        out[key] = val
        seen[key] = lineno
    return out


def parse_file(path, schema: dict) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_text(text, schema, source=str(p))


def to_jsonable(value):
    """Config values as JSON-friendly objects (complex as [re, im])."""
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, tuple):
        return [to_jsonable(v) for v in value]
    return value
