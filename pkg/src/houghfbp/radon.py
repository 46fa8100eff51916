"""Reference discrete Radon transform and direct back projection.

The projector integrates the box-pixel image over unit-width detector strips:
a pixel of value ``f`` spreads ``f`` over the detector with a trapezoidal
footprint (the convolution of two boxes of widths ``|cos(theta)|`` and
``|sin(theta)|``), and bin ``j`` receives the part of that footprint falling in
``[j - 1/2, j + 1/2]``. Weights of one pixel sum to one, so every projection
carries exactly the image mass. Direct back projection is the transpose of
this operator times the angular quadrature weight ``pi / P``; at ``theta = 0``
and ``pi / 2`` it reduces to plain linear interpolation in ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .counting import tally
from .errors import DimensionError, GeometryError, ParameterError
from .types import Image, Sinogram

__all__ = [
    "RadonGeometry",
    "default_num_bins",
    "forward_radon",
    "back_project_direct",
    "fbp_reference",
]


def default_num_bins(n: int) -> int:
    """Smallest even bin count covering the diagonal plus one pixel footprint."""
    r = math.ceil(n * math.sqrt(2.0)) + 2
    return r + (r % 2)


@dataclass(frozen=True)
class RadonGeometry:
    """Parallel-beam geometry: ``P`` angles on ``[0, pi)``, ``R`` unit bins.

    Bin ``j`` is centred at ``r = j - R / 2``.
    """

    num_angles: int
    num_bins: int

    def __post_init__(self):
        if self.num_angles < 1 or self.num_bins < 1:
            raise ParameterError("geometry needs at least one angle and one bin")

    @classmethod
    def for_size(cls, n: int, num_angles: int | None = None) -> "RadonGeometry":
        return cls(num_angles or n, default_num_bins(n))

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.num_angles) * (math.pi / self.num_angles)

    @property
    def center(self) -> float:
        return self.num_bins / 2.0

    def check_covers(self, n: int):
        need = math.ceil(n * math.sqrt(2.0))
        if self.num_bins < need:
            raise GeometryError(f"{self.num_bins} bins cannot cover an image of size {n} (need {need})")


def forward_radon(img: Image, geom: RadonGeometry, backend=None) -> Sinogram:
    """Strip-integral projections of ``img`` for every angle of ``geom``."""
    if not isinstance(img, Image):
        img = Image(img)
    geom.check_covers(img.size)
    kern = _backend.get(backend)
    data, _ = kern.strip_forward(
        np.ascontiguousarray(img.data), np.ascontiguousarray(geom.angles), geom.num_bins
    )
    return Sinogram(data)


def back_project_direct(sino: Sinogram, n: int, counter=None, backend=None) -> Image:
    """Smear every projection back over an ``n x n`` image, weight ``pi / P``.

    Costs ``Theta(P * n**2)``; this is the slow oracle for the FHT path.
    """
    if not isinstance(sino, Sinogram):
        raise DimensionError("back_project_direct expects a Sinogram")
    if n < 1:
        raise DimensionError(f"image size must be positive, got {n}")
    kern = _backend.get(backend)
    data, _ = kern.strip_back(
        np.ascontiguousarray(sino.data), np.ascontiguousarray(sino.angles), int(n)
    )
    # three weighted taps per pixel and angle, plus the final scaling
    tally(counter, adds=3 * sino.num_angles * n * n, mults=3 * sino.num_angles * n * n + n * n)
    return Image(data * (math.pi / sino.num_angles))


def fbp_reference(n: int, sino: Sinogram, kernel) -> Image:
    """FIR ramp filtering followed by direct back projection."""
    from .filters import fir_filter_rows

    filtered = sino.with_data(fir_filter_rows(sino.data, kernel))
    return back_project_direct(filtered, n)
