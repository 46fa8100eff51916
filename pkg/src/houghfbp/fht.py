"""Fast Hough Transform over dyadic line patterns.

A dyadic pattern of height ``h = 2**k`` and shift ``t`` (``0 <= t < h``)
holds one pixel per row. It is the lower half-pattern of shift ``t // 2``
followed by an upper half-pattern of the same shift moved sideways by
``t - t // 2``, so the top row lands exactly ``t`` pixels from the bottom row.
Neighbouring patterns share half-patterns, which is what lets all ``N * 2N``
line sums of an image come out of ``log2 N`` passes of pure additions.

Forward projection produces a :class:`~houghfbp.types.Linogram`. Back
projection reuses the same summation on each linogram block, read in
``(s, t)`` space with a mirrored intercept axis for the ``+`` classes, and
sums the four partial images.
"""
from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass

import numpy as np

from . import _backend
from .counting import tally
from .errors import DimensionError, PlanError
from .types import Image, Linogram, LineClass, is_power_of_two

__all__ = [
    "FhtPlan",
    "build_plan",
    "forward_plan",
    "back_plan",
    "dyadic_offsets",
    "brute_force_block",
    "brute_force_linogram",
    "fht_forward",
    "fht_back_project",
    "back_projection_weights",
]

_EMPTY = 1 << 40


@dataclass(frozen=True)
class FhtPlan:
    """Pruned summation schedule for ``n`` pattern rows over ``width`` columns.

    ``table[l, i]`` describes how row ``i`` of level ``l + 1`` (pattern height
    ``2 ** (l + 1)``) is assembled: the column range it needs, the column
    ranges over which its lower and upper halves are non-zero, the source rows
    and the sideways offset of the upper half.
    """

    n: int
    width: int
    table: np.ndarray
    final_lo: np.ndarray
    final_hi: np.ndarray

    @property
    def levels(self) -> int:
        return self.table.shape[0]

    @property
    def additions(self) -> int:
        """Two-operand additions the schedule performs."""
        t = self.table
        both = np.minimum(t[..., 3], t[..., 5]) - np.maximum(t[..., 2], t[..., 4]) + 1
        ok = (t[..., 0] <= t[..., 1]) & (t[..., 2] <= t[..., 3]) & (t[..., 4] <= t[..., 5])
        return int(np.sum(np.where(ok & (both > 0), both, 0)))


def _check_size(n):
    if not is_power_of_two(n):
        raise PlanError(f"FHT needs a power-of-two size, got {n}")


def build_plan(n, width, supp_lo, supp_hi, need_lo, need_hi) -> FhtPlan:
    """Build a pruned plan.

    ``supp_lo/hi`` bound the non-zero columns of each input row; ``need_lo/hi``
    give the output columns wanted for each final shift. Partial sums outside
    both sets are never formed.
    """
    _check_size(n)
    k = n.bit_length() - 1
    rows = np.arange(n)
    supp = [(np.asarray(supp_lo, np.int64).copy(), np.asarray(supp_hi, np.int64).copy())]
    empty = supp[0][0] > supp[0][1]
    supp[0][0][empty], supp[0][1][empty] = _EMPTY, -_EMPTY
    links = []
    for level in range(1, k + 1):
        h = 1 << level
        half = h >> 1
        g, tau = rows // h, rows % h
        sigma = tau >> 1
        off = tau - sigma
        lrow = g * h + sigma
        urow = lrow + half
        plo, phi = supp[-1]
        lo = np.minimum(plo[lrow], plo[urow] - off)
        hi = np.maximum(phi[lrow], phi[urow] - off)
        lo[lo > _EMPTY // 2] = _EMPTY
        hi[hi < -_EMPTY // 2] = -_EMPTY
        supp.append((lo, hi))
        links.append((lrow, urow, off))

    need_top = (np.asarray(need_lo, np.int64).copy(), np.asarray(need_hi, np.int64).copy())
    need = [None] * (k + 1)
    need[k] = need_top
    for level in range(k, 0, -1):
        lo, hi = need[level]
        lrow, urow, off = links[level - 1]
        plo = np.full(n, _EMPTY, np.int64)
        phi = np.full(n, -_EMPTY, np.int64)
        live = lo <= hi
        np.minimum.at(plo, lrow[live], lo[live])
        np.maximum.at(phi, lrow[live], hi[live])
        np.minimum.at(plo, urow[live], lo[live] + off[live])
        np.maximum.at(phi, urow[live], hi[live] + off[live])
        need[level - 1] = (plo, phi)

    def comp(level):
        lo = np.maximum(np.maximum(need[level][0], supp[level][0]), 0)
        hi = np.minimum(np.minimum(need[level][1], supp[level][1]), width - 1)
        return lo, hi

    table = np.zeros((k, n, 9), np.int64)
    for level in range(1, k + 1):
        lo, hi = comp(level)
        lrow, urow, off = links[level - 1]
        plo, phi = supp[level - 1]
        llo, lhi = np.maximum(lo, plo[lrow]), np.minimum(hi, phi[lrow])
        ulo, uhi = np.maximum(lo, plo[urow] - off), np.minimum(hi, phi[urow] - off)
        dead = lo > hi
        for a, b in ((llo, lhi), (ulo, uhi)):
            bad = dead | (a > b)
            a[bad], b[bad] = 1, 0
        lo[dead], hi[dead] = 1, 0
        table[level - 1] = np.stack([lo, hi, llo, lhi, ulo, uhi, lrow, urow, off], axis=1)
    flo, fhi = comp(k)
    dead = flo > fhi
    flo[dead], fhi[dead] = 1, 0
    return FhtPlan(n, width, table, flo, fhi)


@functools.lru_cache(maxsize=32)
def forward_plan(n: int) -> FhtPlan:
    """Plan for right-moving patterns over an image stored in columns ``[n, 2n)``."""
    _check_size(n)
    t = np.arange(n)
    return build_plan(n, 2 * n, np.full(n, n), np.full(n, 2 * n - 1), n - t, np.full(n, 2 * n - 1))


@functools.lru_cache(maxsize=32)
def back_plan(n: int) -> FhtPlan:
    """Plan for back projection of one (possibly mirrored) linogram block.

    Row ``t`` of the block is non-zero in columns ``[0, n - 1 + t]``; outputs
    are needed in columns ``[0, n)`` for every pixel row.
    """
    _check_size(n)
    t = np.arange(n)
    return build_plan(n, 2 * n, np.zeros(n, np.int64), n - 1 + t, np.zeros(n, np.int64), np.full(n, n - 1))


def _run(plan, src, counter, backend):
    kern = _backend.get(backend)
    out, adds = kern.fht_apply(
        np.ascontiguousarray(src, dtype=np.float64), plan.table, plan.final_lo, plan.final_hi
    )
    tally(counter, adds=adds)
    return out


def _forward_pos(f, counter, backend):
    n = f.shape[0]
    src = np.zeros((n, 2 * n))
    src[:, n:] = f
    return _run(forward_plan(n), src, counter, backend)


def _forward_vertical(f, sign, counter, backend):
    if sign > 0:
        return _forward_pos(f, counter, backend)
    return _forward_pos(f[:, ::-1], counter, backend)[:, ::-1]


def fht_forward(img: Image, counter=None, backend=None) -> Linogram:
    """Sums over every dyadic pattern of the four line classes.

    Mostly horizontal classes are the mostly vertical ones of the transposed
    image.
    """
    f = img.data if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    n = f.shape[0]
    _check_size(n)
    blocks = {}
    for cls in LineClass:
        src = f if cls.vertical else f.T
        blocks[cls] = _forward_vertical(src, cls.sign, counter, backend)
    return Linogram(n, blocks)


def back_projection_weights(n: int) -> np.ndarray:
    """Per-shift weights applied to linogram rows before back projection.

    Uniform shifts are non-uniform in angle: the normal turns by
    ``dtheta = (n - 1) / ((n - 1)**2 + t**2)`` per unit shift. End rows sit on
    class boundaries shared with a neighbouring class and get half weight.
    The weights of one class sum to ``pi / 4``. Each weight also carries the
    factor ``sqrt(1 + (t / (n - 1))**2)`` that turns a linogram value (a sum
    over rows) back into a line integral.
    """
    if n == 1:
        return np.array([math.pi / 4])
    t = np.arange(n, dtype=np.float64)
    m = n - 1.0
    w = m / (m * m + t * t)
    w[0] *= 0.5
    w[-1] *= 0.5
    w *= (math.pi / 4) / w.sum()
    return w * np.sqrt(1.0 + (t / m) ** 2)


def fht_back_project(lin: Linogram, counter=None, backend=None) -> Image:
    """Back project a linogram with four FHT passes and sum the results.

    For a mostly vertical class, the lines through pixel ``(x, y)`` trace a
    dyadic pattern of shift ``y`` through the block in ``(s, t)`` space,
    starting at intercept ``x``. For ``-`` classes that pattern moves towards
    larger ``s``; for ``+`` classes towards smaller ``s``, handled by mirroring
    the intercept axis (the ``-x`` argument). Mostly horizontal classes were
    built from the transposed image, so their partial images are transposed
    back. Attaching the transpose to the vertical classes instead (the other
    way the assembly is sometimes written) misplaces two quadrants and fails
    the comparison with direct back projection.
    """
    if not isinstance(lin, Linogram):
        raise DimensionError("fht_back_project expects a Linogram")
    n = lin.size
    _check_size(n)
    weights = back_projection_weights(n)
    plan = back_plan(n)
    kern = _backend.get(backend)
    total = np.zeros((n, n))
    bufa, bufb, across = _scratch(n)
    # horizontal classes land transposed; gather them and transpose once
    across.fill(0.0)
    for cls in LineClass:
        adds = kern.fht_back_block(
            lin.blocks[cls], weights, plan.table, plan.final_lo, plan.final_hi,
            cls.sign > 0, False, total if cls.vertical else across, bufa, bufb,
        )
        tally(counter, adds=adds, mults=n * 2 * n)
    kern.add_transposed(total, across)
    tally(counter, adds=3 * n * n)
    return Image.adopt(total)


_local = threading.local()


_HUGE = 1 << 21


def _scratch(n):
    """Two ``(n, 2n)`` work buffers and an ``(n, n)`` one, reused per thread.

    Both come from one block aligned to 2 MiB (so large sizes can sit on huge
    pages), the second offset by a non power of two so matching rows of the
    two buffers do not share cache sets.
    """
    cache = getattr(_local, "bufs", None)
    if cache is None:
        cache = _local.bufs = {}
    if n not in cache:
        if len(cache) >= 4:
            cache.pop(next(iter(cache)))
        size = n * 2 * n
        gap = 520
        raw = np.empty(2 * size + gap + _HUGE // 8)
        start = (-raw.ctypes.data % _HUGE) // 8
        a = raw[start:start + size].reshape(n, 2 * n)
        b = raw[start + size + gap:start + 2 * size + gap].reshape(n, 2 * n)
        cache[n] = (a, b, np.empty((n, n)))
    return cache[n]


def dyadic_offsets(h: int, t: int) -> list:
    """Sideways offset of each row of the dyadic pattern (height ``h``, shift ``t``)."""
    if h == 1:
        return [0]
    half = dyadic_offsets(h // 2, t // 2)
    jump = t - t // 2
    return half + [jump + d for d in half]


def brute_force_block(f, sign: int = 1) -> np.ndarray:
    """Mostly vertical line sums by walking every pattern pixel by pixel.

    Returns an ``(n, 2n)`` array laid out like a linogram block.
    """
    f = np.asarray(f)
    n = f.shape[0]
    out = np.zeros((n, 2 * n), dtype=np.result_type(f.dtype, np.float64))
    base = n if sign > 0 else 0
    for t in range(n):
        offs = dyadic_offsets(n, t)
        for c in range(2 * n):
            s = c - base
            acc = 0
            for y, d in enumerate(offs):
                x = s + d if sign > 0 else s - d
                if 0 <= x < n:
                    acc += f[y, x]
            out[t, c] = acc
    return out


def brute_force_linogram(f) -> Linogram:
    f = np.asarray(f)
    return Linogram(
        f.shape[0],
        {cls: brute_force_block(f if cls.vertical else f.T, cls.sign) for cls in LineClass},
    )
