"""Timing of the compiled kernels against the numpy fallback."""
from __future__ import annotations

from . import _backend
from .fht import fht_back_project, fht_forward
from .linogram import sinogram_to_linogram
from .filters import apply_iir_symmetric, fit_iir, causal_target, ramp_kernel
from .pipeline import phantom_sinogram, time_call
from .radon import RadonGeometry, back_project_direct, forward_radon


def _cases(n):
    ph, sino = phantom_sinogram(n, n)
    lin = fht_forward(ph)
    pair, _ = fit_iir(causal_target(ramp_kernel(64)), 2, 2, restarts=1)
    geom = RadonGeometry.for_size(n)
    return {
        "fht_back_project": lambda b: fht_back_project(lin, backend=b),
        "back_project_direct": lambda b: back_project_direct(sino, n, backend=b),
        "forward_radon": lambda b: forward_radon(ph, geom, backend=b),
        "iir_symmetric": lambda b: apply_iir_symmetric(sino.data, pair, backend=b),
        "sinogram_to_linogram": lambda b: sinogram_to_linogram(sino, n, backend=b),
    }


def bench_backends(sizes, repeats=3):
    """One row per kernel, size and backend: best time and speedup over numpy."""
    rows = []
    names = _backend.available()
    for n in sizes:
        for kernel, fn in _cases(n).items():
            times = {}
            for b in names:
                times[b], _ = time_call(fn, b, repeats=repeats)
            base = times["python"]
            for b in names:
                rows.append({
                    "kernel": kernel,
                    "n": n,
                    "backend": b,
                    "seconds": times[b],
                    "speedup": base / times[b],
                })
    return rows

