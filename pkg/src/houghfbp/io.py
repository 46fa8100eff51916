"""File formats.

Arrays use a 16-byte little-endian header followed by ``rows * cols``
little-endian float32 values::

    offset  size  field
    0       4     magic b"TOMO"
    4       1     format version (1)
    5       1     dtype tag (1 = float32)
    6       1     payload kind (1 image, 2 sinogram, 3 linogram)
    7       1     reserved, zero
    8       4     rows (uint32)
    12      4     cols (uint32)

A linogram is stored as its four blocks stacked in line-class order, shape
``(4N, 2N)``.

Filter coefficients are a small text file of ``key value...`` lines; blank
lines and ``#`` comments are ignored. Floats are written with ``repr`` so
they read back exactly.
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import DimensionError, ParseError
from .filters import FitReport, IirFilterPair
from .types import Image, Linogram, Sinogram

__all__ = [
    "save_image",
    "load_image",
    "save_sinogram",
    "load_sinogram",
    "save_linogram",
    "load_linogram",
    "save_coeffs",
    "load_coeffs",
    "read_array",
    "write_array",
]

MAGIC = b"TOMO"
VERSION = 1
DTYPE_F32 = 1
KIND_IMAGE, KIND_SINOGRAM, KIND_LINOGRAM = 1, 2, 3
_KIND_NAMES = {KIND_IMAGE: "image", KIND_SINOGRAM: "sinogram", KIND_LINOGRAM: "linogram"}
_HEADER = struct.Struct("<4sBBBBII")


def encode_array(arr, kind: int) -> bytes:
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise DimensionError(f"only 2-d arrays can be stored, got shape {arr.shape}")
    rows, cols = arr.shape
    head = _HEADER.pack(MAGIC, VERSION, DTYPE_F32, kind, 0, rows, cols)
    return head + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def decode_array(buf: bytes, kind: int) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise ParseError(f"header needs {_HEADER.size} bytes, file has {len(buf)}", len(buf))
    magic, version, dtype, got, reserved, rows, cols = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", 4)
    if dtype != DTYPE_F32:
        raise ParseError(f"unsupported dtype tag {dtype}", 5)
    if got != kind:
        raise ParseError(f"expected a {_KIND_NAMES[kind]} file, found kind {got}", 6)
    if reserved != 0:
        raise ParseError("reserved header byte must be zero", 7)
    need = _HEADER.size + 4 * rows * cols
    if len(buf) < need:
        raise ParseError(f"payload truncated: need {need} bytes, file has {len(buf)}", len(buf))
    if len(buf) > need:
        raise ParseError(f"{len(buf) - need} trailing bytes after payload", need)
    data = np.frombuffer(buf, dtype="<f4", count=rows * cols, offset=_HEADER.size)
    return data.reshape(rows, cols).astype(np.float64)


def write_array(path, arr, kind: int):
    with open(path, "wb") as fh:
        fh.write(encode_array(arr, kind))


def read_array(path, kind: int) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_array(fh.read(), kind)


def save_image(path, img: Image):
    write_array(path, img.data, KIND_IMAGE)


def load_image(path) -> Image:
    arr = read_array(path, KIND_IMAGE)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"image file holds a non-square {arr.shape} array")
    return Image(arr)


def save_sinogram(path, sino: Sinogram):
    write_array(path, sino.data, KIND_SINOGRAM)


def load_sinogram(path) -> Sinogram:
    return Sinogram(read_array(path, KIND_SINOGRAM))


def save_linogram(path, lin: Linogram):
    write_array(path, lin.stacked(), KIND_LINOGRAM)


def load_linogram(path) -> Linogram:
    return Linogram.from_stacked(read_array(path, KIND_LINOGRAM))


# coefficient files

def format_coeffs(pair: IirFilterPair, report: FitReport | None = None) -> str:
    lines = [
        "# houghfbp recursive ramp filter",
        "version 1",
        f"order {pair.feedforward_order} {pair.feedback_order}",
        "b " + " ".join(repr(float(v)) for v in pair.b),
        "a " + " ".join(repr(float(v)) for v in pair.a),
    ]
    if report is not None:
        lines += [
            f"mse {float(report.mse)!r}",
            f"horizon {report.horizon}",
            f"iterations {report.iterations}",
            f"evaluations {report.evaluations}",
            f"converged {int(report.converged)}",
            f"restart {report.restart}",
        ]
    return "\n".join(lines) + "\n"


def parse_coeffs(text: str):
    """Parse a coefficient file; returns ``(pair, report or None)``."""
    fields = {}
    offset = 0
    raw = text.encode("utf-8")
    for line in raw.split(b"\n"):
        start = offset
        offset += len(line) + 1
        body = line.split(b"#", 1)[0].strip()
        if not body:
            continue
        try:
            key, *vals = body.decode("ascii").split()
        except UnicodeDecodeError:
            raise ParseError("non-ascii characters", start) from None
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", start)
        fields[key] = (vals, start)

    def get(key, required=True):
        if key not in fields:
            if required:
                raise ParseError(f"missing key {key!r}", len(raw))
            return None
        return fields[key]

    def numbers(key, kind, count=None, required=True):
        item = get(key, required)
        if item is None:
            return None
        vals, at = item
        if count is not None and len(vals) != count:
            raise ParseError(f"{key!r} needs {count} values, got {len(vals)}", at)
        try:
            return [kind(v) for v in vals]
        except ValueError:
            raise ParseError(f"bad number in {key!r}", at) from None

    (version,) = numbers("version", int, 1)
    if version != 1:
        raise ParseError(f"unsupported coefficient version {version}", get("version")[1])
    m, q = numbers("order", int, 2)
    b = numbers("b", float, m)
    a = numbers("a", float, q)
    pair = IirFilterPair(b, a)
    mse = numbers("mse", float, 1, required=False)
    report = None
    if mse is not None:
        (horizon,) = numbers("horizon", int, 1)
        its = numbers("iterations", int, 1, required=False) or [0]
        evals = numbers("evaluations", int, 1, required=False) or [0]
        conv = numbers("converged", int, 1, required=False) or [1]
        restart = numbers("restart", int, 1, required=False) or [0]
        report = FitReport(mse[0], its[0], evals[0], bool(conv[0]), horizon, restart[0])
    return pair, report


def save_coeffs(path, pair: IirFilterPair, report: FitReport | None = None):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_coeffs(pair, report))


def load_coeffs(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError("coefficient file is not ascii", exc.start) from None
    return parse_coeffs(text)
