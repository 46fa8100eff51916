"""Pure numpy implementations of the hot loops.

These mirror the compiled kernels in ``_kernels.pyx`` one for one and are
used when the extension is unavailable or ``HOUGHFBP_PURE=1`` is set. Every
function returns ``(result, ops)`` where ``ops`` counts the additions or
multiplications performed by the loop body that matters for complexity
accounting.
"""
import numpy as np
from scipy.signal import lfilter

NAME = "python"

# plan table columns
LO, HI, LLO, LHI, ULO, UHI, LROW, UROW, OFF = range(9)


def fht_apply(src, table, final_lo, final_hi):
    """Run a pruned dyadic summation described by ``table``.

    ``src`` has shape ``(n, W)``. ``table`` has shape ``(levels, n, 9)``.
    Returns the ``(n, W)`` result (zero outside the final ranges) and the
    number of two-operand additions.
    """
    n, width = src.shape
    cur = np.array(src, dtype=np.float64, copy=True)
    nxt = np.zeros_like(cur)
    adds = 0
    for level in table:
        for i in range(n):
            lo, hi, llo, lhi, ulo, uhi, lrow, urow, off = level[i]
            if lo > hi:
                continue
            row = nxt[i]
            row[lo:hi + 1] = 0.0
            if llo <= lhi:
                row[llo:lhi + 1] += cur[lrow, llo:lhi + 1]
            if ulo <= uhi:
                row[ulo:uhi + 1] += cur[urow, ulo + off:uhi + off + 1]
                both = min(lhi, uhi) - max(llo, ulo) + 1
                if both > 0:
                    adds += both
        cur, nxt = nxt, cur
    out = np.zeros((n, width))
    for i in range(n):
        lo, hi = final_lo[i], final_hi[i]
        if lo <= hi:
            out[i, lo:hi + 1] = cur[i, lo:hi + 1]
    return out, adds


def fht_back_block(block, weights, table, final_lo, final_hi, mirror, transpose, total, bufa=None, bufb=None):
    """Back project one weighted block and add it into ``total`` in place.

    ``bufa`` and ``bufb`` are scratch buffers used by the compiled version and
    ignored here.
    """
    n = block.shape[0]
    src = block * np.asarray(weights)[:, None]
    if mirror:
        src = src[:, ::-1]
    out, adds = fht_apply(np.ascontiguousarray(src), table, final_lo, final_hi)
    part = out[:, :n]
    if mirror:
        part = part[:, ::-1]
    total += part.T if transpose else part
    return adds


def add_transposed(total, part):
    """``total += part.T`` in place."""
    total += part.T


def _strip_weights(v, a, b):
    """Bin index of the first touched bin and the three strip weights.

    ``v`` holds continuous bin coordinates of pixel centres. The pixel's
    footprint on the detector is the convolution of boxes of widths ``a`` and
    ``b``; the weight of bin ``j`` is the footprint mass in ``[j - 1/2, j + 1/2]``.
    """
    w1 = 0.5 * (a + b)
    j0 = np.floor(v - 0.5 - w1).astype(np.int64) + 1
    edges = [trapezoid_cdf(j0 + k - v - 0.5, a, b) for k in range(4)]
    return j0, [edges[k + 1] - edges[k] for k in range(3)]


def trapezoid_cdf(u, a, b):
    """CDF of the sum of two centred uniforms of widths ``a`` and ``b``."""
    u = np.asarray(u, dtype=np.float64)
    m, q = max(a, b), min(a, b)
    w1 = 0.5 * (m + q)
    w2 = 0.5 * (m - q)
    ab2 = 2.0 * m * q if q > 0 else 1.0
    out = np.where(u <= -w1, 0.0, 1.0)
    mid = np.abs(u) <= w2
    out = np.where(mid, 0.5 + u / m, out)
    left = (u > -w1) & (u < -w2)
    out = np.where(left, (u + w1) ** 2 / ab2, out)
    right = (u > w2) & (u < w1)
    out = np.where(right, 1.0 - (w1 - u) ** 2 / ab2, out)
    return out


def _pixel_offsets(n):
    coords = np.arange(n) + 0.5 - 0.5 * n
    return np.meshgrid(coords, coords)  # xx[y, x], yy[y, x]


def strip_forward(image, angles, num_bins):
    n = image.shape[0]
    xx, yy = _pixel_offsets(n)
    vals = image.ravel()
    sino = np.zeros((len(angles), num_bins))
    center = 0.5 * num_bins
    for i, theta in enumerate(angles):
        c, s = np.cos(theta), np.sin(theta)
        v = (xx * c + yy * s).ravel() + center
        j0, weights = _strip_weights(v, abs(c), abs(s))
        row = np.zeros(num_bins + 4)
        for k, w in enumerate(weights):
            idx = np.clip(j0 + k + 2, 0, num_bins + 3)
            row += np.bincount(idx, weights=vals * w, minlength=num_bins + 4)
        sino[i] = row[2:num_bins + 2]
    return sino, 0


def strip_back(sino, angles, n):
    num_bins = sino.shape[1]
    xx, yy = _pixel_offsets(n)
    img = np.zeros(n * n)
    center = 0.5 * num_bins
    padded = np.zeros((sino.shape[0], num_bins + 4))
    padded[:, 2:num_bins + 2] = sino
    for i, theta in enumerate(angles):
        c, s = np.cos(theta), np.sin(theta)
        v = (xx * c + yy * s).ravel() + center
        j0, weights = _strip_weights(v, abs(c), abs(s))
        for k, w in enumerate(weights):
            idx = np.clip(j0 + k + 2, 0, num_bins + 3)
            img += padded[i, idx] * w
    return img.reshape(n, n), 0


def iir_symmetric(rows, b, a):
    """Causal plus anticausal recursive filtering of every row."""
    rows = np.asarray(rows, dtype=np.float64)
    den = np.concatenate([[1.0], a])
    fwd = lfilter(b, den, rows, axis=-1)
    bwd = lfilter(b, den, rows[..., ::-1], axis=-1)[..., ::-1]
    per_sample = 2 * (len(b) + len(a))
    return fwd + bwd, per_sample * rows.size


def iir_causal(x, b, a):
    den = np.concatenate([[1.0], a])
    return lfilter(b, den, np.asarray(x, dtype=np.float64))


def _bspline3(x):
    x = np.abs(x)
    return np.where(x < 1, 2.0 / 3.0 - x * x + 0.5 * x ** 3, np.where(x < 2, (2.0 - x) ** 3 / 6.0, 0.0))


def _hat(x):
    return np.maximum(1.0 - np.abs(x), 0.0)


def sample_lines(coef, theta, r, num_angles, num_bins, pad, cubic):
    """Interpolate padded projection rows ``coef`` at ``(theta, r)``.

    Linear in angle; cubic B-spline (``coef`` prefiltered) or linear in ``r``.
    Angles wrap at ``pi`` with ``r -> -r``; off the rows the value is zero.
    """
    p = num_angles
    width = coef.shape[1]
    u = np.asarray(theta) / (np.pi / p)
    i0 = np.floor(u).astype(np.int64)
    fu = u - i0
    i0 = np.clip(i0, 0, p - 1)
    i1 = i0 + 1
    wrap = i1 >= p
    i1 = np.where(wrap, 0, i1)
    taps, basis = ((-1, 0, 1, 2), _bspline3) if cubic else ((0, 1), _hat)

    def along_r(rows, rr):
        v = rr + 0.5 * num_bins + pad
        j0 = np.floor(v).astype(np.int64)
        fv = v - j0
        out = np.zeros(rr.shape)
        for k in taps:
            j = j0 + k
            ok = (j >= 0) & (j < width)
            out += np.where(ok, coef[rows, np.clip(j, 0, width - 1)], 0.0) * basis(fv - k)
        return out

    r = np.asarray(r)
    lo = along_r(i0, r)
    hi = along_r(i1, np.where(wrap, -r, r))
    return (1.0 - fu) * lo + fu * hi
