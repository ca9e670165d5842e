"""CSV and binary layouts for random variables, spectra and processes.

CSV: one header row, comma separated, LF line endings, reals written with 17
significant digits.  Lines starting with ``#`` are comments and are skipped on
read.

Binary process layout (little endian)::

    int64 depth, int64 slice_count, then slice_count * 2**depth float64 values
    in row-major (time, atom) order.
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .martingale import AdaptedProcess
from .space import DyadicSpace, RandomVariable, WalshSpectrum

HEADER = struct.Struct("<qq")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_text(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _data_lines(text: str):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def variable_csv(f, comments=()) -> str:
    """Columns ``index,value`` for a :class:`RandomVariable` or :class:`WalshSpectrum`."""
    vals = f.coeffs if isinstance(f, WalshSpectrum) else f.values
    return csv_text(["index", "value"], ((i, float(v)) for i, v in enumerate(vals)), comments)


def read_variable_csv(text: str) -> RandomVariable:
    rows = list(csv.DictReader(_data_lines(text)))
    if not rows or set(rows[0]) != {"index", "value"}:
        raise StructuralError("expected columns index,value")
    size = len(rows)
    depth = size.bit_length() - 1
    if size != 1 << depth or depth < 1:
        raise StructuralError(f"{size} rows is not a power of two >= 2")
    values = np.empty(size)
    for r in rows:
        values[int(r["index"])] = float(r["value"])
    return RandomVariable(DyadicSpace(depth), values)


def process_csv(Y: AdaptedProcess, comments=()) -> str:
    """Columns ``time,atom,value``, time-major."""
    rows = (
        (l, m, float(Y.values[l, m]))
        for l in range(Y.values.shape[0])
        for m in range(Y.values.shape[1])
    )
    return csv_text(["time", "atom", "value"], rows, comments)


def _process_from_array(arr: np.ndarray) -> AdaptedProcess:
    slices, size = arr.shape
    depth = size.bit_length() - 1
    if size != 1 << depth or depth < 1:
        raise StructuralError(f"{size} atoms is not a power of two >= 2")
    if slices != depth + 1:
        raise StructuralError(f"depth {depth} needs {depth + 1} slices, found {slices}")
    return AdaptedProcess(DyadicSpace(depth), arr, validate=False)


def read_process_csv(text: str) -> AdaptedProcess:
    """Parse ``time,atom,value`` rows; the adaptedness check is left to the caller."""
    reader = csv.DictReader(_data_lines(text))
    if reader.fieldnames is None or list(reader.fieldnames) != ["time", "atom", "value"]:
        raise StructuralError(f"expected columns time,atom,value, got {reader.fieldnames}")
    cells = {}
    for r in reader:
        cells[int(r["time"]), int(r["atom"])] = float(r["value"])
    if not cells:
        raise StructuralError("process file has no rows")
    slices = max(t for t, _ in cells) + 1
    size = max(m for _, m in cells) + 1
    if len(cells) != slices * size:
        raise StructuralError(
            f"expected {slices * size} (time, atom) cells, found {len(cells)}"
        )
    arr = np.empty((slices, size))
    for (t, m), v in cells.items():
        arr[t, m] = v
    return _process_from_array(arr)


def process_bytes(Y: AdaptedProcess) -> bytes:
    arr = np.ascontiguousarray(Y.values, dtype="<f8")
    return HEADER.pack(Y.depth, arr.shape[0]) + arr.tobytes()


def read_process_bytes(data: bytes) -> AdaptedProcess:
    if len(data) < HEADER.size:
        raise StructuralError("binary process shorter than its header")
    depth, slices = HEADER.unpack_from(data)
    if not 1 <= depth <= 62 or slices < 1:
        raise StructuralError(f"bad header: depth={depth}, slices={slices}")
    size = 1 << depth
    expected = HEADER.size + 8 * slices * size
    if len(data) != expected:
        raise StructuralError(f"expected {expected} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(slices, size)
    return _process_from_array(arr.astype(np.float64))


def load_process(path) -> AdaptedProcess:
    """Read a process from ``.csv`` (text) or any other extension (binary)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_process_csv(path.read_text(encoding="utf-8"))
    return read_process_bytes(path.read_bytes())


def save_process(Y: AdaptedProcess, path, comments=()) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(process_csv(Y, comments), encoding="utf-8", newline="\n")
    else:
        path.write_bytes(process_bytes(Y))
