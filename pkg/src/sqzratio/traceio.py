"""Trace interchange format: CSV with a '# key=value' metadata header.

Layout: UTF-8, LF line endings, '#'-prefixed metadata lines, then the column
header ``index,x,power_dbm`` and one row per sample. ``qnl_dbm`` and
``dark_dbm`` are mandatory metadata keys. Floats are written with repr so
that a fixed seed reproduces a byte-identical file.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .synth import Trace

__all__ = ["write_trace", "read_trace", "format_trace", "parse_trace"]

_HEADER = "index,x,power_dbm"


def _format_meta_value(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _parse_meta_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def format_trace(trace: Trace) -> str:
    """Serialize a trace to the CSV interchange text."""
    out = io.StringIO()
    for key in sorted(trace.meta):
        out.write(f"# {key}={_format_meta_value(trace.meta[key])}\n")
    out.write(_HEADER + "\n")
    for i, (x, p) in enumerate(zip(trace.x.tolist(), trace.power_dbm.tolist())):
        out.write(f"{i},{x!r},{p!r}\n")
    return out.getvalue()


def parse_trace(text: str) -> Trace:
    """Parse the CSV interchange text back into a Trace."""
    meta: dict = {}
    xs: list[float] = []
    ps: list[float] = []
    saw_header = False
    last_index = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" not in body:
                raise ValueError(f"line {lineno}: metadata line without '=': {raw!r}")
            key, _, value = body.partition("=")
            meta[key.strip()] = _parse_meta_value(value.strip())
            continue
        if not saw_header:
            if line != _HEADER:
                raise ValueError(f"line {lineno}: expected header {_HEADER!r}, got {raw!r}")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns, got {len(parts)}")
        index = int(parts[0])
        if index <= last_index:
            raise ValueError(f"line {lineno}: sample indices must be strictly increasing")
        last_index = index
        xs.append(float(parts[1]))
        ps.append(float(parts[2]))
    if not saw_header or not xs:
        raise ValueError("trace file has no sample rows")
    return Trace(x=np.asarray(xs), power_dbm=np.asarray(ps), meta=meta)


def write_trace(trace: Trace, path: str | Path) -> None:
    """Write a trace CSV file (UTF-8, LF)."""
    Path(path).write_bytes(format_trace(trace).encode("utf-8"))


def read_trace(path: str | Path) -> Trace:
    """Read a trace CSV file."""
    return parse_trace(Path(path).read_text(encoding="utf-8"))
