"""Core containers: images, sinograms, linograms and line classes.

Arrays are stored as read-only float64 numpy arrays. An image ``data[y, x]``
has ``x`` as the column and ``y`` as the row, with row 0 at the bottom of the
square domain ``[0, N]^2``; pixel ``(x, y)`` samples the point
``(x + 0.5, y + 0.5)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "Image",
    "Sinogram",
    "Linogram",
    "LineClass",
    "rmse",
    "is_power_of_two",
]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _frozen(a, ndim: int, what: str, copy: bool = True) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True) if copy else a
    if arr.ndim != ndim:
        raise DimensionError(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{what} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


class LineClass(enum.Enum):
    """The four families of lines, split by orientation and shift sign.

    Mostly vertical lines are summed down image columns, mostly horizontal
    ones along rows. The ``+`` classes drift towards larger coordinates as
    they advance, the ``-`` classes towards smaller ones.
    """

    VERTICAL_POS = "Lv+"
    VERTICAL_NEG = "Lv-"
    HORIZONTAL_POS = "Lh+"
    HORIZONTAL_NEG = "Lh-"

    @property
    def vertical(self) -> bool:
        return self in (LineClass.VERTICAL_POS, LineClass.VERTICAL_NEG)

    @property
    def sign(self) -> int:
        return 1 if self in (LineClass.VERTICAL_POS, LineClass.HORIZONTAL_POS) else -1

    @property
    def angle_range(self) -> tuple[float, float]:
        """Half-open range ``[lo, hi)`` of normal angles covered by the class."""
        q = math.pi / 4
        return {
            LineClass.VERTICAL_NEG: (0.0, q),
            LineClass.HORIZONTAL_NEG: (q, 2 * q),
            LineClass.HORIZONTAL_POS: (2 * q, 3 * q),
            LineClass.VERTICAL_POS: (3 * q, 4 * q),
        }[self]

    @classmethod
    def parse(cls, text: str) -> "LineClass":
        for member in cls:
            if member.value == text or member.name == text:
                return member
        raise ParameterError(f"unknown line class {text!r}")


@dataclass(frozen=True)
class Image:
    """Square ``N x N`` scalar field."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data, 2, "image")
        if arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionError(f"image must be square and non-empty, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @classmethod
    def adopt(cls, arr: np.ndarray) -> "Image":
        """Wrap a freshly computed float64 array without copying it.

        The caller gives up the array: it is made read-only in place.
        """
        if not (isinstance(arr, np.ndarray) and arr.dtype == np.float64 and arr.flags.owndata):
            return cls(arr)
        out = object.__new__(cls)
        data = _frozen(arr, 2, "image", copy=False)
        if data.shape[0] != data.shape[1] or data.shape[0] < 1:
            raise DimensionError(f"image must be square and non-empty, got {data.shape}")
        object.__setattr__(out, "data", data)
        return out

    @classmethod
    def zeros(cls, n: int) -> "Image":
        return cls(np.zeros((n, n)))

    def transpose(self) -> "Image":
        return Image(self.data.T)


@dataclass(frozen=True)
class Sinogram:
    """``P x R`` projections at angles ``i * pi / P`` over ``[0, pi)``.

    Detector bin ``j`` sits at ``r = j - R / 2`` (unit bin spacing), with ``r``
    measured from the centre of the image domain.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data, 2, "sinogram")
        if min(arr.shape) < 1:
            raise DimensionError(f"sinogram must be non-empty, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def num_angles(self) -> int:
        return self.data.shape[0]

    @property
    def num_bins(self) -> int:
        return self.data.shape[1]

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.num_angles) * (math.pi / self.num_angles)

    @property
    def center(self) -> float:
        return self.num_bins / 2.0

    @property
    def bin_positions(self) -> np.ndarray:
        return np.arange(self.num_bins) - self.center

    def with_data(self, data) -> "Sinogram":
        out = Sinogram(data)
        if out.data.shape != self.data.shape:
            raise DimensionError(f"expected shape {self.data.shape}, got {out.data.shape}")
        return out


@dataclass(frozen=True)
class Linogram:
    """Four blocks of line sums, one per :class:`LineClass`.

    Each block has shape ``(N, 2N)``: row ``t`` is the integer shift
    ``0 <= t < N`` (the pattern moves ``t`` pixels sideways over the ``N``
    pixels it advances), and column ``c`` is the intercept ``s`` on the first
    row of the pattern. For ``+`` classes ``s = c - N``; for ``-`` classes
    ``s = c``. Every dyadic line that meets the image has a column.
    """

    size: int
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.size)
        if n < 1:
            raise DimensionError("linogram size must be positive")
        if set(self.blocks) != set(LineClass):
            raise DimensionError("linogram needs exactly one block per line class")
        frozen = {}
        for cls in LineClass:
            arr = _frozen(self.blocks[cls], 2, f"linogram block {cls.value}")
            if arr.shape != (n, 2 * n):
                raise DimensionError(
                    f"block {cls.value} has shape {arr.shape}, expected {(n, 2 * n)}"
                )
            frozen[cls] = arr
        object.__setattr__(self, "size", n)
        object.__setattr__(self, "blocks", frozen)

    @staticmethod
    def intercept_offset(cls: LineClass, n: int) -> int:
        return n if cls.sign > 0 else 0

    def intercepts(self, cls: LineClass) -> np.ndarray:
        return np.arange(2 * self.size) - self.intercept_offset(cls, self.size)

    def at(self, cls: LineClass, t: int, s: int) -> float:
        c = s + self.intercept_offset(cls, self.size)
        if not (0 <= t < self.size and 0 <= c < 2 * self.size):
            raise ParameterError(f"({t}, {s}) outside block {cls.value}")
        return float(self.blocks[cls][t, c])

    def __getitem__(self, cls) -> np.ndarray:
        if isinstance(cls, str):
            cls = LineClass.parse(cls)
        return self.blocks[cls]

    @classmethod
    def zeros(cls, n: int) -> "Linogram":
        return cls(n, {c: np.zeros((n, 2 * n)) for c in LineClass})

    def stacked(self) -> np.ndarray:
        """Blocks stacked in :class:`LineClass` order, shape ``(4N, 2N)``."""
        return np.concatenate([self.blocks[c] for c in LineClass], axis=0)

    @classmethod
    def from_stacked(cls, arr) -> "Linogram":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] % 4 or arr.shape[1] != arr.shape[0] // 2:
            raise DimensionError(f"stacked linogram must be (4N, 2N), got {arr.shape}")
        n = arr.shape[0] // 4
        return cls(n, {c: arr[i * n:(i + 1) * n] for i, c in enumerate(LineClass)})


def rmse(a, b) -> float:
    """Root-mean-square difference of two equally sized images."""
    x = a.data if isinstance(a, Image) else np.asarray(a, dtype=np.float64)
    y = b.data if isinstance(b, Image) else np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"rmse of mismatched shapes {x.shape} and {y.shape}")
    return float(np.sqrt(np.mean((x - y) ** 2)))
