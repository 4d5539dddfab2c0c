"""Plain-text set and function files.

Set file::

    group: 5,5
    0,1
    3,4

Function file: the same header, then ``coords : value`` lines where value is
an integer, a real, or ``re,im``.  Coordinates not listed are zero.  ``#``
starts a comment; blank lines and whitespace are ignored.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .group import GroupSet, GroupSpec
from .spectral import DenseFunction

__all__ = ["read_set", "write_set", "format_set", "parse_set", "read_function", "write_function",
           "format_function", "parse_function"]


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _header(lines) -> GroupSpec:
    try:
        first = next(lines)
    except StopIteration:
        raise ValueError("empty file: expected a 'group:' header") from None
    key, _, rest = first.partition(":")
    if key.strip().lower() != "group" or not rest.strip():
        raise ValueError(f"expected 'group: m_1,...,m_r', got {first!r}")
    return GroupSpec.parse(rest)


def _coords(g: GroupSpec, text: str) -> int:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    return g.element(tuple(int(p) for p in parts))


def parse_set(text: str) -> GroupSet:
    lines = _lines(text)
    g = _header(lines)
    return GroupSet.from_elements(g, [_coords(g, line) for line in lines])


def format_set(A: GroupSet) -> str:
    out = [f"group: {A.group}"]
    out += [",".join(str(c) for c in A.group.coords(int(x))) for x in A.elements()]
    return "\n".join(out) + "\n"


def read_set(path: str | os.PathLike) -> GroupSet:
    return parse_set(Path(path).read_text())


def write_set(A: GroupSet, path: str | os.PathLike) -> None:
    Path(path).write_text(format_set(A))


def _parse_value(text: str):
    text = text.replace(" ", "")
    if "," in text:
        re_, im = text.split(",")
        return complex(float(re_), float(im))
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_function(text: str) -> DenseFunction:
    lines = _lines(text)
    g = _header(lines)
    entries = {}
    for line in lines:
        c, sep, v = line.partition(":")
        if not sep:
            raise ValueError(f"expected 'coords : value', got {line!r}")
        entries[_coords(g, c)] = _parse_value(v)
    kinds = {type(v) for v in entries.values()}
    if complex in kinds:
        vals = np.zeros(g.order, dtype=np.complex128)
    elif float in kinds:
        vals = np.zeros(g.order, dtype=np.float64)
    elif any(abs(v) >= 1 << 62 for v in entries.values()):
        vals = np.zeros(g.order, dtype=object)
        vals[:] = 0
    else:
        vals = np.zeros(g.order, dtype=np.int64)
    for x, v in entries.items():
        vals[x] = v
    return DenseFunction(g, vals)


def _format_value(v) -> str:
    if isinstance(v, (complex, np.complexfloating)):
        return f"{float(v.real)!r},{float(v.imag)!r}"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(int(v))


def format_function(f: DenseFunction) -> str:
    """Integer functions list their support; real and complex ones list every entry so the dtype survives."""
    g = f.group
    out = [f"group: {g}"]
    xs = f.support() if f.is_integer else range(g.order)
    for x in xs:
        out.append(",".join(str(c) for c in g.coords(int(x))) + " : " + _format_value(f.values[x]))
    return "\n".join(out) + "\n"


def read_function(path: str | os.PathLike) -> DenseFunction:
    return parse_function(Path(path).read_text())


def write_function(f: DenseFunction, path: str | os.PathLike) -> None:
    Path(path).write_text(format_function(f))
