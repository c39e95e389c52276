"""Canonical JSON output: sorted keys, 17 significant digits, ``inf`` as a string."""

from __future__ import annotations

import json
import math
from typing import Any


def format_float(x: float) -> str:
    if math.isnan(x):
        raise ValueError("NaN cannot be serialized")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = "%.17g" % x
    if text == "-0":
        text = "0"
    return text


def _encode(obj: Any, indent: int | None, level: int) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if hasattr(obj, "dtype"):  # numpy scalar
        return _encode(obj.item(), indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        parts = [f"{json.dumps(str(k), ensure_ascii=False)}:{' ' if indent else ''}"
                 f"{_encode(v, indent, level + 1)}" for k, v in items]
        return _join(parts, "{", "}", indent, level)
    if isinstance(obj, (list, tuple)):
        parts = [_encode(v, indent, level + 1) for v in obj]
        return _join(parts, "[", "]", indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _join(parts: list[str], open_: str, close: str, indent: int | None, level: int) -> str:
    if not parts:
        return open_ + close
    if not indent:
        return open_ + ",".join(parts) + close
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    return open_ + "\n" + ",\n".join(pad + p for p in parts) + "\n" + end + close


def dumps(obj: Any, pretty: bool = False) -> str:
    """Serialize ``obj`` deterministically; the result always ends with a newline."""
    return _encode(obj, 2 if pretty else None, 0) + "\n"


def real(value: Any) -> float:
    """Inverse of :func:`format_float` for values read back from a report."""
    if isinstance(value, str):
        if value in ("inf", "+inf"):
            return math.inf
        if value == "-inf":
            return -math.inf
        raise ValueError(f"not a real: {value!r}")
    return float(value)
