# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Same signatures and results as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
cimport cython
from libc.math cimport floor, cos, sin, fabs

cnp.import_array()

NAME = "cython"


from libc.stdlib cimport malloc, calloc, free

# plan table columns
DEF LO = 0
DEF HI = 1
DEF LLO = 2
DEF LHI = 3
DEF ULO = 4
DEF UHI = 5
DEF LROW = 6
DEF UROW = 7
DEF OFF = 8

cdef Py_ssize_t GROUP_BYTES = 1048576


def set_group_bytes(Py_ssize_t nbytes):
    """Cache budget for the blocked lower and fused upper FHT levels (testing)."""
    global GROUP_BYTES
    GROUP_BYTES = nbytes


cdef inline long long _comb(const long[:, :, ::1] table, Py_ssize_t lev, Py_ssize_t i,
                            const double* lsrc, const double* urow, double* row) noexcept nogil:
    """Row ``i`` of level ``lev`` from its lower source row and unshifted upper source row."""
    cdef long lo = table[lev, i, LO], hi = table[lev, i, HI]
    cdef long llo, lhi, ulo, uhi, blo, bhi, c
    cdef long long cnt = 0
    cdef bint inl, inu
    cdef const double* usrc
    if lo > hi:
        return 0
    llo = table[lev, i, LLO]
    lhi = table[lev, i, LHI]
    ulo = table[lev, i, ULO]
    uhi = table[lev, i, UHI]
    usrc = urow + table[lev, i, OFF]
    if llo > lhi:
        llo = hi + 1
        lhi = hi
    if ulo > uhi:
        ulo = hi + 1
        uhi = hi
    # walk [lo, hi] in segments with a fixed set of contributing halves
    blo = lo
    while blo <= hi:
        inl = llo <= blo <= lhi
        inu = ulo <= blo <= uhi
        bhi = hi
        # end of this segment: next boundary of either range
        if inl:
            bhi = lhi if lhi < bhi else bhi
        elif llo > blo and llo - 1 < bhi:
            bhi = llo - 1
        if inu:
            bhi = uhi if uhi < bhi else bhi
        elif ulo > blo and ulo - 1 < bhi:
            bhi = ulo - 1
        if inl and inu:
            for c in range(blo, bhi + 1):
                row[c] = lsrc[c] + usrc[c]
            cnt += bhi - blo + 1
        elif inl:
            for c in range(blo, bhi + 1):
                row[c] = lsrc[c]
        elif inu:
            for c in range(blo, bhi + 1):
                row[c] = usrc[c]
        else:
            for c in range(blo, bhi + 1):
                row[c] = 0.0
        blo = bhi + 1
    return cnt


cdef inline long long _fht_row(const long[:, :, ::1] table, Py_ssize_t lev, Py_ssize_t i,
                               double* cur, double* nxt, Py_ssize_t width) noexcept nogil:
    if table[lev, i, LO] > table[lev, i, HI]:
        return 0
    return _comb(table, lev, i, cur + table[lev, i, LROW] * width,
                 cur + table[lev, i, UROW] * width, nxt + i * width)


cdef double* _fused_row(const long[:, :, ::1] table, Py_ssize_t stage, Py_ssize_t base,
                        Py_ssize_t i, Py_ssize_t slot, double* cur, double* scratch,
                        Py_ssize_t* tags, Py_ssize_t width, long long* adds) noexcept nogil:
    """Row ``i`` after ``stage`` levels, built depth first from the rows after ``base`` levels.

    Every row feeds two consecutive rows of the next level, so one cached row
    per branch of the recursion (``slot`` numbers the branches heap style)
    means each row is computed exactly once.
    """
    cdef double* dst
    cdef const double* lsrc = NULL
    cdef const double* usrc = NULL
    cdef Py_ssize_t lev = stage - 1
    if stage == base:
        return cur + i * width
    dst = scratch + (slot - 2) * width
    if tags[slot - 2] == i:
        return dst
    tags[slot - 2] = i
    if table[lev, i, LO] > table[lev, i, HI]:
        return dst
    if table[lev, i, LLO] <= table[lev, i, LHI]:
        lsrc = _fused_row(table, lev, base, table[lev, i, LROW], 2 * slot, cur, scratch, tags, width, adds)
    if table[lev, i, ULO] <= table[lev, i, UHI]:
        usrc = _fused_row(table, lev, base, table[lev, i, UROW], 2 * slot + 1, cur, scratch, tags, width, adds)
    adds[0] += _comb(table, lev, i, lsrc, usrc, dst)
    return dst


cdef struct Source:
    # rows to load into the first buffer, optionally weighted and mirrored
    const double* data
    const double* weights
    bint mirror


cdef struct Sink:
    # where the last level goes when accumulating into an image
    double* total
    Py_ssize_t n
    bint mirror
    bint transpose
    const long* final_lo
    const long* final_hi
    # transposed output goes through a zeroed buffer of SINK_ROWS rows
    double* rowbuf
    Py_ssize_t stride
    Py_ssize_t block_base


cdef inline void _load_rows(Source* src, double* buf, Py_ssize_t r0, Py_ssize_t r1, Py_ssize_t width) noexcept nogil:
    cdef Py_ssize_t i, c
    cdef double w
    cdef const double* row
    cdef double* out
    for i in range(r0, r1):
        w = src.weights[i] if src.weights != NULL else 1.0
        row = src.data + i * width
        out = buf + i * width
        if src.mirror:
            for c in range(width):
                out[c] = w * row[width - 1 - c]
        else:
            for c in range(width):
                out[c] = w * row[c]


DEF SINK_ROWS = 32


cdef void _sink_flush(Sink* sink) noexcept nogil:
    """Add the buffered rows into the image as contiguous runs of its rows."""
    cdef Py_ssize_t n = sink.n, base = sink.block_base, rows, c, k, x
    cdef double* trow
    cdef double* buf = sink.rowbuf
    if base < 0:
        return
    rows = SINK_ROWS if base + SINK_ROWS <= n else n - base
    for c in range(n):
        x = n - 1 - c if sink.mirror else c
        trow = sink.total + x * n + base
        for k in range(rows):
            trow[k] += buf[k * sink.stride + c]
            buf[k * sink.stride + c] = 0.0
    sink.block_base = -1


cdef inline void _sink_row(Sink* sink, Py_ssize_t i, const double* row) noexcept nogil:
    cdef Py_ssize_t n = sink.n, c, base
    cdef Py_ssize_t lo = sink.final_lo[i], hi = sink.final_hi[i]
    cdef double* dst
    if lo < 0:
        lo = 0
    if hi > n - 1:
        hi = n - 1
    if sink.transpose:
        base = i - i % SINK_ROWS
        if base != sink.block_base:
            _sink_flush(sink)
            sink.block_base = base
        dst = sink.rowbuf + (i - base) * sink.stride
        for c in range(lo, hi + 1):
            dst[c] += row[c]
    elif sink.mirror:
        dst = sink.total + i * n + n - 1
        for c in range(lo, hi + 1):
            dst[-c] += row[c]
    else:
        dst = sink.total + i * n
        for c in range(lo, hi + 1):
            dst[c] += row[c]


cdef double* _fht_levels(const long[:, :, ::1] table, Source* src, double* a, double* b,
                         Py_ssize_t n, Py_ssize_t width, Sink* sink, long long* adds) noexcept nogil:
    """Load ``src`` and run every level.

    Returns the buffer holding the result, or NULL when the last level went
    straight into ``sink``.

    The lower levels only combine rows inside aligned groups, so they run
    group by group on a working set that stays in cache (the group is loaded
    from ``src`` just before). The upper levels are fused into depth-first
    passes that read the big buffer once and keep intermediate rows in a
    small scratch tree.
    """
    cdef Py_ssize_t nlev = table.shape[0]
    cdef Py_ssize_t lc = 0, d, g0, lev, i, gsize, k, nslots
    cdef bint last
    cdef double* cur
    cdef double* nxt
    cdef double* tmp
    cdef double* scratch
    cdef double* out
    cdef Py_ssize_t* tags
    cdef const double* lsrc
    cdef const double* usrc
    # groups whose two buffers fit the cache budget
    while lc < nlev and (2 << lc) * width * 8 <= GROUP_BYTES:
        lc += 1
    gsize = 1 << lc
    g0 = 0
    while g0 < n:
        _load_rows(src, a, g0, g0 + gsize, width)
        cur = a
        nxt = b
        for lev in range(lc):
            for i in range(g0, g0 + gsize):
                adds[0] += _fht_row(table, lev, i, cur, nxt, width)
            tmp = cur
            cur = nxt
            nxt = tmp
        g0 += gsize
    cur = a if lc % 2 == 0 else b
    nxt = b if lc % 2 == 0 else a
    lev = lc
    while lev < nlev:
        # deepest fusion whose scratch tree (plus one output row) fits the budget
        d = 1
        while lev + d < nlev and ((1 << (d + 1)) - 1) * width * 8 <= GROUP_BYTES:
            d += 1
        last = lev + d == nlev and sink != NULL
        nslots = (1 << d) - 2
        # scratch tree, then one row for the output when it goes to the sink
        scratch = <double*>malloc((nslots + 1) * width * sizeof(double))
        tags = <Py_ssize_t*>malloc((nslots + 1) * sizeof(Py_ssize_t))
        if scratch == NULL or tags == NULL:
            free(scratch)
            free(tags)
            adds[0] = -1
            return NULL
        for k in range(nslots):
            tags[k] = -1
        k = lev + d - 1
        for i in range(n):
            if table[k, i, LO] > table[k, i, HI]:
                continue
            lsrc = NULL
            usrc = NULL
            if table[k, i, LLO] <= table[k, i, LHI]:
                lsrc = _fused_row(table, k, lev, table[k, i, LROW], 2, cur, scratch, tags, width, adds)
            if table[k, i, ULO] <= table[k, i, UHI]:
                usrc = _fused_row(table, k, lev, table[k, i, UROW], 3, cur, scratch, tags, width, adds)
            out = scratch + nslots * width if last else nxt + i * width
            adds[0] += _comb(table, k, i, lsrc, usrc, out)
            if last:
                _sink_row(sink, i, out)
        free(scratch)
        free(tags)
        if last:
            return NULL
        tmp = cur
        cur = nxt
        nxt = tmp
        lev += d
    if sink != NULL:
        for i in range(n):
            _sink_row(sink, i, cur + i * width)
        return NULL
    return cur


def fht_apply(const double[:, ::1] src, const long[:, :, ::1] table, const long[::1] final_lo, const long[::1] final_hi):
    cdef Py_ssize_t n = src.shape[0], width = src.shape[1]
    cdef Py_ssize_t i, c
    cdef long long adds = 0
    cdef Source source
    bufa = np.empty((n, width), dtype=np.float64)
    bufb = np.empty((n, width), dtype=np.float64)
    cdef double[:, ::1] va = bufa
    cdef double[:, ::1] vb = bufb
    cdef double* res
    out = np.zeros((n, width), dtype=np.float64)
    cdef double[:, ::1] o = out
    source.data = &src[0, 0]
    source.weights = NULL
    source.mirror = False
    with nogil:
        res = _fht_levels(table, &source, &va[0, 0], &vb[0, 0], n, width, NULL, &adds)
    if adds < 0:
        raise MemoryError("FHT scratch allocation failed")
    with nogil:
        for i in range(n):
            for c in range(final_lo[i], final_hi[i] + 1):
                o[i, c] = res[i * width + c]
    return out, adds


def fht_back_block(const double[:, ::1] block, const double[::1] weights,
                   const long[:, :, ::1] table, const long[::1] final_lo, const long[::1] final_hi,
                   bint mirror, bint transpose, double[:, ::1] total,
                   double[:, ::1] bufa, double[:, ::1] bufb):
    """Back project one weighted linogram block and add it into ``total``.

    Row ``t`` of ``block`` is scaled by ``weights[t]``; with ``mirror`` the
    intercept axis is reversed on the way in and the pixel axis on the way
    out; with ``transpose`` the partial image is added transposed.
    """
    cdef Py_ssize_t n = block.shape[0], width = block.shape[1]
    cdef long long adds = 0
    cdef Source source
    cdef Sink sink
    cdef double* res
    if total.shape[0] != n or total.shape[1] != n:
        raise ValueError("total must be n x n")
    source.data = &block[0, 0]
    source.weights = &weights[0]
    source.mirror = mirror
    sink.total = &total[0, 0]
    sink.n = n
    sink.mirror = mirror
    sink.transpose = transpose
    sink.final_lo = &final_lo[0]
    sink.final_hi = &final_hi[0]
    sink.block_base = -1
    sink.rowbuf = NULL
    if transpose:
        # padded so the buffered rows do not share cache sets
        sink.stride = n + 8
        sink.rowbuf = <double*>calloc(SINK_ROWS * sink.stride, sizeof(double))
        if sink.rowbuf == NULL:
            raise MemoryError("FHT output buffer allocation failed")
    with nogil:
        res = _fht_levels(table, &source, &bufa[0, 0], &bufb[0, 0], n, width, &sink, &adds)
        if adds >= 0:
            _sink_flush(&sink)
    free(sink.rowbuf)
    if adds < 0:
        raise MemoryError("FHT scratch allocation failed")
    return adds


def add_transposed(double[:, ::1] total, const double[:, ::1] part):
    """``total += part.T`` in cache-sized tiles."""
    cdef Py_ssize_t n = total.shape[0], i0, j0, i, j, i1, j1
    cdef Py_ssize_t tile = 64
    if total.shape[1] != n or part.shape[0] != n or part.shape[1] != n:
        raise ValueError("add_transposed needs two square arrays of equal size")
    with nogil:
        i0 = 0
        while i0 < n:
            i1 = i0 + tile if i0 + tile < n else n
            j0 = 0
            while j0 < n:
                j1 = j0 + tile if j0 + tile < n else n
                for i in range(i0, i1):
                    for j in range(j0, j1):
                        total[i, j] += part[j, i]
                j0 = j1
            i0 = i1


cdef inline double trap_cdf(double u, double m, double q, double w1, double w2, double ab2) noexcept nogil:
    # CDF of the sum of centred uniforms of widths m >= q
    if u <= -w1:
        return 0.0
    if u >= w1:
        return 1.0
    if u < -w2:
        return (u + w1) * (u + w1) / ab2
    if u > w2:
        return 1.0 - (w1 - u) * (w1 - u) / ab2
    return 0.5 + u / m


cdef inline void strip_setup(double theta, double* c, double* s, double* m, double* q,
                             double* w1, double* w2, double* ab2) noexcept nogil:
    c[0] = cos(theta)
    s[0] = sin(theta)
    cdef double a = fabs(c[0]), b = fabs(s[0])
    m[0] = a if a > b else b
    q[0] = b if a > b else a
    w1[0] = 0.5 * (a + b)
    w2[0] = 0.5 * (m[0] - q[0])
    ab2[0] = 2.0 * m[0] * q[0] if q[0] > 0 else 1.0


def strip_forward(const double[:, ::1] image, const double[::1] angles, Py_ssize_t num_bins):
    cdef Py_ssize_t n = image.shape[0], nang = angles.shape[0]
    cdef Py_ssize_t i, x, y, k, j
    cdef long j0
    cdef double c, s, m, q, w1, w2, ab2, center = 0.5 * num_bins, half = 0.5 * n
    cdef double v, vrow, val, e0, e1
    sino = np.zeros((nang, num_bins), dtype=np.float64)
    cdef double[:, ::1] out = sino
    with nogil:
        for i in range(nang):
            strip_setup(angles[i], &c, &s, &m, &q, &w1, &w2, &ab2)
            for y in range(n):
                vrow = (y + 0.5 - half) * s + center + (0.5 - half) * c
                for x in range(n):
                    val = image[y, x]
                    if val == 0.0:
                        continue
                    v = vrow + x * c
                    j0 = <long>floor(v - 0.5 - w1) + 1
                    e0 = trap_cdf(j0 - v - 0.5, m, q, w1, w2, ab2)
                    for k in range(3):
                        e1 = trap_cdf(j0 + k - v + 0.5, m, q, w1, w2, ab2)
                        j = j0 + k
                        if j >= 0 and j < num_bins:
                            out[i, j] += val * (e1 - e0)
                        e0 = e1
    return sino, 0


def strip_back(const double[:, ::1] sino, const double[::1] angles, Py_ssize_t n):
    cdef Py_ssize_t nang = angles.shape[0], num_bins = sino.shape[1]
    cdef Py_ssize_t i, x, y, k, j
    cdef long j0
    cdef double c, s, m, q, w1, w2, ab2, center = 0.5 * num_bins, half = 0.5 * n
    cdef double v, vrow, acc, e0, e1
    img = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = img
    with nogil:
        for i in range(nang):
            strip_setup(angles[i], &c, &s, &m, &q, &w1, &w2, &ab2)
            for y in range(n):
                vrow = (y + 0.5 - half) * s + center + (0.5 - half) * c
                for x in range(n):
                    v = vrow + x * c
                    j0 = <long>floor(v - 0.5 - w1) + 1
                    e0 = trap_cdf(j0 - v - 0.5, m, q, w1, w2, ab2)
                    acc = 0.0
                    for k in range(3):
                        e1 = trap_cdf(j0 + k - v + 0.5, m, q, w1, w2, ab2)
                        j = j0 + k
                        if j >= 0 and j < num_bins:
                            acc += sino[i, j] * (e1 - e0)
                        e0 = e1
                    out[y, x] += acc
    return img, 0


def iir_symmetric(rows, const double[::1] b, const double[::1] a):
    arr = np.ascontiguousarray(rows, dtype=np.float64)
    shape = arr.shape
    flat = arr.reshape(-1, arr.shape[arr.ndim - 1])
    result = np.zeros_like(flat)
    state = np.zeros(flat.shape[1], dtype=np.float64)
    _iir_rows(flat, b, a, result, state)
    return result.reshape(shape), 2 * (b.shape[0] + a.shape[0]) * flat.size


cdef void _iir_rows(const double[:, ::1] x, const double[::1] b, const double[::1] a,
                    double[:, ::1] out, double[::1] y) noexcept nogil:
    cdef Py_ssize_t nrows = x.shape[0], length = x.shape[1]
    cdef Py_ssize_t nb = b.shape[0], na = a.shape[0]
    cdef Py_ssize_t r, t, k, u
    cdef double acc
    for r in range(nrows):
        for t in range(length):
            acc = 0.0
            for k in range(nb):
                if k <= t:
                    acc = acc + b[k] * x[r, t - k]
            for k in range(1, na + 1):
                if k <= t:
                    acc = acc - a[k - 1] * y[t - k]
            y[t] = acc
            out[r, t] = acc
        for u in range(length):
            t = length - 1 - u
            acc = 0.0
            for k in range(nb):
                if t + k < length:
                    acc = acc + b[k] * x[r, t + k]
            for k in range(1, na + 1):
                if t + k < length:
                    acc = acc - a[k - 1] * y[t + k]
            y[t] = acc
            out[r, t] = out[r, t] + acc


def iir_causal(x, const double[::1] b, const double[::1] a):
    cdef const double[::1] xin = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t length = xin.shape[0], nb = b.shape[0], na = a.shape[0]
    cdef Py_ssize_t t, k
    cdef double acc
    result = np.empty(length, dtype=np.float64)
    cdef double[::1] y = result
    with nogil:
        for t in range(length):
            acc = 0.0
            for k in range(nb):
                if t - k >= 0:
                    acc = acc + b[k] * xin[t - k]
            for k in range(1, na + 1):
                if t - k >= 0:
                    acc = acc - a[k - 1] * y[t - k]
            y[t] = acc
    return result


cdef inline double _radial(const double[:, ::1] coef, Py_ssize_t row, double v, bint cubic) noexcept nogil:
    cdef Py_ssize_t width = coef.shape[1], j0, j, k
    cdef double fv, x, w, acc = 0.0
    j0 = <Py_ssize_t>floor(v)
    fv = v - j0
    if cubic:
        for k in range(-1, 3):
            j = j0 + k
            if j < 0 or j >= width:
                continue
            x = fabs(fv - k)
            if x < 1.0:
                w = 2.0 / 3.0 - x * x + 0.5 * x * x * x
            elif x < 2.0:
                w = (2.0 - x) * (2.0 - x) * (2.0 - x) / 6.0
            else:
                continue
            acc += coef[row, j] * w
    else:
        if 0 <= j0 < width:
            acc += coef[row, j0] * (1.0 - fv)
        if 0 <= j0 + 1 < width:
            acc += coef[row, j0 + 1] * fv
    return acc


def sample_lines(const double[:, ::1] coef, theta, r, Py_ssize_t num_angles,
                 Py_ssize_t num_bins, Py_ssize_t pad, bint cubic):
    th2 = np.broadcast_arrays(np.asarray(theta, dtype=np.float64), np.asarray(r, dtype=np.float64))
    cdef const double[:, :] th = th2[0]
    cdef const double[:, :] rr = th2[1]
    cdef Py_ssize_t rows = th.shape[0], cols = th.shape[1], a, b, i0, i1
    out = np.empty((rows, cols))
    cdef double[:, ::1] o = out
    cdef double u, fu, rv, off = 0.5 * num_bins + pad, step = 3.141592653589793 / num_angles
    with nogil:
        for a in range(rows):
            for b in range(cols):
                u = th[a, b] / step
                i0 = <Py_ssize_t>floor(u)
                fu = u - i0
                if i0 < 0:
                    i0 = 0
                if i0 > num_angles - 1:
                    i0 = num_angles - 1
                i1 = i0 + 1
                rv = rr[a, b]
                if i1 >= num_angles:
                    o[a, b] = (1.0 - fu) * _radial(coef, i0, rv + off, cubic) + fu * _radial(coef, 0, off - rv, cubic)
                else:
                    o[a, b] = (1.0 - fu) * _radial(coef, i0, rv + off, cubic) + fu * _radial(coef, i1, rv + off, cubic)
    return out
