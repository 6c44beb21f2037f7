"""
Persistence formats.

Field binary (little-endian throughout)::

    offset  size  content
    0       16    magic b"MAGSCATTER-FLD1\\0"
    16      4     uint32 dim
    20      4     uint32 m (points per axis)
    24      8     float64 half_width
    32      4     uint32 complex flag (1 complex, 0 real)
    36      4     uint32 reserved (0)
    40      ...   float64 values in C (row-major) order; complex values are
                  stored as interleaved (re, im) pairs

CSV files use ',' separators, '.' decimals and a header row.  Plot data is
tab-separated text with '#' header comments.  Every file is written to a
temporary name in the target directory and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fields import Grid, make_grid

MAGIC = b"MAGSCATTER-FLD1\0"
_HEADER = struct.Struct("<IIdII")
HEADER_SIZE = len(MAGIC) + _HEADER.size


def atomic_write(path, data) -> Path:
    """Write ``data`` (bytes or str) to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def encode_field(field: np.ndarray, grid: Grid) -> bytes:
    f = np.asarray(field)
    if f.shape != grid.shape:
        raise ValueError("field does not live on this grid")
    is_complex = np.iscomplexobj(f)
    header = MAGIC + _HEADER.pack(grid.dim, grid.points_per_axis, grid.half_width, int(is_complex), 0)
    body = np.ascontiguousarray(f, dtype="<c16" if is_complex else "<f8").tobytes()
    return header + body


def decode_field(data: bytes) -> tuple[np.ndarray, Grid]:
    if len(data) < HEADER_SIZE or data[: len(MAGIC)] != MAGIC:
        raise ValueError("not a field binary (bad magic)")
    dim, m, half_width, is_complex, _ = _HEADER.unpack_from(data, len(MAGIC))
    grid = make_grid(dim, half_width, m)
    dtype = "<c16" if is_complex else "<f8"
    expected = grid.size * np.dtype(dtype).itemsize
    body = data[HEADER_SIZE:]
    if len(body) != expected:
        raise ValueError(f"field binary has {len(body)} payload bytes, expected {expected}")
    values = np.frombuffer(body, dtype=dtype).reshape(grid.shape)
    return values.astype(complex if is_complex else float), grid


def write_field(path, field: np.ndarray, grid: Grid) -> Path:
    return atomic_write(path, encode_field(field, grid))


def read_field(path) -> tuple[np.ndarray, Grid]:
    return decode_field(Path(path).read_bytes())


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write(path, csv_text(header, rows))


def read_csv(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def plot_text(columns: Sequence[str], rows: Iterable[Sequence], comment: str = "") -> str:
    """Tab-separated columns with a '#' header, readable by gnuplot and numpy.loadtxt."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append("# " + "\t".join(columns))
    for row in rows:
        lines.append("\t".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def slice_text(field: np.ndarray, grid: Grid, part: str = "abs", comment: str = "") -> str:
    """Central 2D slice as a row-major text matrix (last axis along each row)."""
    f = np.asarray(field)
    if grid.dim == 3:
        f = f[:, :, grid.points_per_axis // 2]
    parts = {"re": np.real, "im": np.imag, "abs": np.abs}
    if part not in parts:
        raise ValueError(f"unknown slice part {part!r}")
    values = parts[part](f)
    lines = [f"# {c}" for c in comment.splitlines()] if comment else []
    lines.append(f"# {part}(u) on axis {grid.axis[0]!r} .. {grid.axis[-1]!r}, {grid.points_per_axis} points")
    lines.extend("\t".join(repr(float(v)) for v in row) for row in values)
    return "\n".join(lines) + "\n"
