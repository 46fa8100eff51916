"""Conversion between ``(r, theta)`` sinograms and ``(s, t)`` linograms.

A line of class Lv+ with intercept ``s`` and shift ``t`` enters the bottom
of the square domain at ``x = s`` and leaves the top at ``x = s + t``; Lv-
leaves at ``x = s + t`` with ``t <= 0``. Lh+ and Lh- are the same lines with
the roles of ``x`` and ``y`` swapped. The parameterization is uniform in
``t``, so neighbouring rows of a linogram are not equally spaced in angle.

A linogram entry sums one pixel per row, which is the line integral divided
by ``k_t = sqrt(1 + t**2 / N**2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import spline_filter1d

from . import _backend
from .counting import tally
from .errors import DimensionError, GeometryError, ParameterError
from .types import Linogram, LineClass, Sinogram

__all__ = [
    "StLine",
    "st_to_rtheta",
    "scaling_factor",
    "sinogram_to_linogram",
    "linogram_lines",
]


@dataclass(frozen=True)
class StLine:
    line_class: LineClass
    s: float
    t: float


def scaling_factor(t, n):
    """``sqrt(1 + t**2 / n**2)``: ratio of a line integral to its row sum."""
    t = np.asarray(t, dtype=np.float64)
    out = np.sqrt(1.0 + (t / n) ** 2)
    return float(out) if out.ndim == 0 else out


def st_to_rtheta(line: StLine, n: float):
    """Normal angle and signed distance of an ``(s, t)`` line.

    ``r`` is measured from the corner ``(0, 0)`` of the domain ``[0, n]^2``
    along the normal ``(cos theta, sin theta)``; ``theta`` lies in the angle
    range of the line class. At ``t = 0`` the class boundary is used: ``pi / 2``
    for the horizontal classes and ``0`` for the vertical ones (Lv+ wraps from
    ``pi`` to ``0``, which flips the sign of ``r``).

    Examples
    --------
    >>> r, th = st_to_rtheta(StLine(LineClass.HORIZONTAL_NEG, 2.0, -4.0), 4)
    >>> round(th / math.pi, 12), round(r, 12)
    (0.25, 1.414213562373)
    """
    cls, s, t = line.line_class, float(line.s), float(line.t)
    if cls.sign * t < 0:
        raise ParameterError(f"{cls.value} needs shift of sign {cls.sign:+d}, got t={t}")
    if abs(t) > n:
        raise ParameterError(f"|t| must not exceed {n}, got {t}")
    if cls.vertical:
        # (s, 0) -> (s + t, n), normal (n, -t)
        nx, ny = n, -t
        px, py = s, 0.0
    else:
        # (0, s) -> (n, s + t), normal (-t, n)
        nx, ny = -t, n
        px, py = 0.0, s
    norm = math.hypot(nx, ny)
    nx, ny = nx / norm, ny / norm
    theta = math.atan2(ny, nx)
    if theta < 0:
        theta += math.pi
        nx, ny = -nx, -ny
    if theta >= math.pi:
        theta -= math.pi
        nx, ny = -nx, -ny
    return px * nx + py * ny, theta


def linogram_lines(n: int, cls: LineClass):
    """``(theta, r, k)`` of every entry of a linogram block.

    Entry ``(t, c)`` is the line through the centres of the first and last
    pixel of its dyadic pattern. ``theta`` is in ``[0, pi)``, ``r`` is measured
    from the image centre, and ``k`` is the ratio of line length to row count.
    All arrays have the block shape ``(n, 2n)``.
    """
    t = np.arange(n, dtype=np.float64)[:, None]
    s = (np.arange(2 * n) - Linogram.intercept_offset(cls, n)).astype(np.float64)[None, :]
    span = max(n - 1, 1)
    # vertical frame: pattern runs from (s, 0) to (s + sign * t, n - 1) in pixel indices
    dx, dy = cls.sign * t, np.full_like(t, float(span))
    px = s + 0.5 - 0.5 * n
    py = 0.5 - 0.5 * n
    length = np.hypot(dx, dy)
    nx, ny = dy / length, -dx / length
    if not cls.vertical:
        nx, ny = ny, nx
        px, py = py, px
    flip = (ny < 0) | ((ny == 0) & (nx < 0))
    nx = np.where(flip, -nx, nx)
    ny = np.where(flip, -ny, ny)
    theta = np.arctan2(ny, nx)
    theta = np.where(theta >= math.pi, theta - math.pi, theta)
    r = px * nx + py * ny
    k = length / span
    shape = (n, 2 * n)
    return np.broadcast_to(theta, shape), np.broadcast_to(r, shape), np.broadcast_to(k, shape)


_PAD = 4


def _radial_coefficients(sino: Sinogram, interpolation: str):
    """Zero-padded rows to interpolate from, prefiltered for the cubic spline."""
    data = np.pad(sino.data, ((0, 0), (_PAD, _PAD)))
    if interpolation == "cubic":
        data = spline_filter1d(data, order=3, axis=1, mode="constant")
    elif interpolation != "linear":
        raise ParameterError(f"unknown interpolation {interpolation!r}")
    return data


def _sample(sino: Sinogram, theta, r, interpolation="cubic", backend=None):
    """Interpolate at ``(theta, r)``: linear in angle, linear or cubic spline in ``r``.

    Off the detector the projections are zero.
    """
    coef = _radial_coefficients(sino, interpolation)
    kern = _backend.get(backend)
    return kern.sample_lines(
        coef, theta, r, sino.num_angles, sino.num_bins, _PAD, interpolation == "cubic"
    )


def sinogram_to_linogram(sino: Sinogram, n: int, counter=None, interpolation="cubic", backend=None) -> Linogram:
    """Resample a sinogram onto the ``(s, t)`` grid of an ``n x n`` image.

    Each entry is interpolated from the sinogram at the ``(r, theta)`` of its
    line and divided by ``k_t`` so that it estimates the row sum a dyadic
    pattern would give. Interpolation is linear in angle; in ``r`` it is a
    cubic B-spline (``"cubic"``, the default, whose prefilter is a recursive
    pass over each projection) or linear (``"linear"``). Ramp-filtered
    projections are rich in high frequencies and the linear kernel blurs them
    noticeably. Costs ``Theta(n**2 + P * R)``.
    """
    if not isinstance(sino, Sinogram):
        raise DimensionError("sinogram_to_linogram expects a Sinogram")
    if n < 1:
        raise DimensionError(f"image size must be positive, got {n}")
    if sino.num_angles < 2:
        raise GeometryError("need at least two projection angles to interpolate in angle")
    blocks = {}
    for cls in LineClass:
        theta, r, k = linogram_lines(n, cls)
        blocks[cls] = _sample(sino, theta, r, interpolation, backend) / k
    taps = 4 if interpolation == "cubic" else 2
    samples = 4 * 2 * n * n
    # two radial interpolations, the angle blend and 1/k per sample
    tally(counter, adds=samples * (2 * taps + 1), mults=samples * (2 * taps + 3))
    if interpolation == "cubic":
        # causal and anticausal prefilter passes
        tally(counter, adds=4 * sino.data.size, mults=4 * sino.data.size)
    return Linogram(n, blocks)
