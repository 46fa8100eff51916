"""Shepp-Logan head phantom rasterized by point sampling at pixel centres."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .types import Image

__all__ = ["Ellipse", "SHEPP_LOGAN", "generate_shepp_logan", "rasterize"]


@dataclass(frozen=True)
class Ellipse:
    """Ellipse in normalized coordinates ``[-1, 1]^2``.

    ``phi`` is the counter-clockwise rotation of the ``a`` axis in radians and
    ``rho`` the intensity added inside.
    """

    x0: float
    y0: float
    a: float
    b: float
    phi: float
    rho: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ParameterError("ellipse semi-axes must be positive")

    def contains(self, u, v):
        c, s = math.cos(self.phi), math.sin(self.phi)
        du, dv = u - self.x0, v - self.y0
        p = (du * c + dv * s) / self.a
        q = (-du * s + dv * c) / self.b
        return p * p + q * q <= 1.0


def _e(x0, y0, a, b, deg, rho):
    return Ellipse(x0, y0, a, b, math.radians(deg), rho)


# Original Shepp-Logan table (head intensity 2.0), y axis pointing up.
SHEPP_LOGAN = (
    _e(0.0, 0.0, 0.69, 0.92, 0, 2.0),
    _e(0.0, -0.0184, 0.6624, 0.874, 0, -0.98),
    _e(0.22, 0.0, 0.11, 0.31, -18, -0.02),
    _e(-0.22, 0.0, 0.16, 0.41, 18, -0.02),
    _e(0.0, 0.35, 0.21, 0.25, 0, 0.01),
    _e(0.0, 0.1, 0.046, 0.046, 0, 0.01),
    _e(0.0, -0.1, 0.046, 0.046, 0, 0.01),
    _e(-0.08, -0.605, 0.046, 0.023, 0, 0.01),
    _e(0.0, -0.605, 0.023, 0.023, 0, 0.01),
    _e(0.06, -0.605, 0.023, 0.046, 0, 0.01),
)


def pixel_coordinates(n: int):
    """Normalized ``(u, v)`` of every pixel centre, arrays indexed ``[y, x]``."""
    c = (np.arange(n) + 0.5 - 0.5 * n) / (0.5 * n)
    return np.meshgrid(c, c)


def rasterize(ellipses, n: int) -> np.ndarray:
    u, v = pixel_coordinates(n)
    out = np.zeros((n, n))
    for e in ellipses:
        out[e.contains(u, v)] += e.rho
    return out


def generate_shepp_logan(n: int) -> Image:
    """Shepp-Logan phantom on an ``n x n`` grid.

    Examples
    --------
    >>> img = generate_shepp_logan(4)
    >>> float(img.data[0, 0])
    0.0
    """
    if int(n) != n or n < 2:
        raise ParameterError(f"phantom size must be an integer >= 2, got {n}")
    return Image(rasterize(SHEPP_LOGAN, int(n)))
