"""Reading input documents and writing reports."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .quatcore import InputError


def load_json(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"{p}: cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(report) -> str:
    """Deterministic JSON text: insertion-ordered keys, fixed indentation."""
    return json.dumps(report, indent=2, default=_default)


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data) + "\n")
