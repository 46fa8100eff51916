"""End-to-end reconstruction and the experiment drivers built on it."""
from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .counting import OpCount
from .errors import ConfigError, FittingError, TomoError
from .fht import fht_back_project
from .filters import (
    IirFilterPair,
    apply_iir_symmetric,
    causal_target,
    fir_filter_rows,
    fit_iir,
    ramp_kernel,
)
from .linogram import sinogram_to_linogram
from .phantom import generate_shepp_logan
from .radon import RadonGeometry, back_project_direct, forward_radon
from .types import Image, Sinogram, is_power_of_two, rmse

__all__ = [
    "FitOptions",
    "ReconstructionConfig",
    "BenchRecord",
    "fitted_ramp_filters",
    "filter_sinogram",
    "back_project",
    "reconstruct",
    "phantom_sinogram",
    "run_order_sweep",
    "run_size_sweep",
    "time_call",
]

FILTER_MODES = ("fir", "iir")
BACKPROJ_MODES = ("direct", "fht")


@dataclass(frozen=True)
class FitOptions:
    """Settings for fitting the recursive ramp filter.

    ``horizon`` of ``None`` means ``K = N``.
    """

    horizon: int | None = None
    restarts: int = 8
    seed: int = 0
    xatol: float = 1e-10
    maxfev: int = 20000
    scale: float = 0.1
    objective: str = "impulse"


@dataclass(frozen=True)
class ReconstructionConfig:
    """Everything needed to turn a sinogram into an image.

    Parameters
    ----------
    n : int
        Output image size.
    num_angles : int, optional
        Projection count, defaults to ``n``.
    filter_mode : {"fir", "iir"}
    fir_half_length : int, optional
        Half length ``L0`` of the FIR ramp, defaults to ``n``.
    iir_order : int
        ``M = Q`` of the recursive filter when ``iir`` is not given.
    iir : IirFilterPair, optional
        Precomputed coefficients; skips fitting.
    backproj_mode : {"direct", "fht"}
    fit : FitOptions
    interpolation : {"cubic", "linear"}
        Radial interpolation used when resampling onto the linogram.
    """

    n: int
    num_angles: int | None = None
    filter_mode: str = "fir"
    fir_half_length: int | None = None
    iir_order: int = 3
    iir: IirFilterPair | None = None
    backproj_mode: str = "direct"
    fit: FitOptions = field(default_factory=FitOptions)
    interpolation: str = "cubic"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"image size must be a positive integer, got {self.n}")
        if self.num_angles is not None and self.num_angles < 1:
            raise ConfigError(f"need at least one projection angle, got {self.num_angles}")
        if self.filter_mode not in FILTER_MODES:
            raise ConfigError(f"filter mode must be one of {FILTER_MODES}, got {self.filter_mode!r}")
        if self.backproj_mode not in BACKPROJ_MODES:
            raise ConfigError(f"back projection must be one of {BACKPROJ_MODES}, got {self.backproj_mode!r}")
        if self.backproj_mode == "fht" and not is_power_of_two(self.n):
            raise ConfigError(f"FHT back projection needs a power-of-two size, got {self.n}")
        if self.filter_mode == "iir" and self.iir is None and self.iir_order < 1:
            raise ConfigError(f"IIR order must be at least 1, got {self.iir_order}")
        if self.fir_half_length is not None and self.fir_half_length < 0:
            raise ConfigError("FIR half length must be non-negative")

    @property
    def angles(self) -> int:
        return self.num_angles or self.n

    @property
    def half_length(self) -> int:
        return self.n if self.fir_half_length is None else self.fir_half_length

    @property
    def horizon(self) -> int:
        return self.n if self.fit.horizon is None else self.fit.horizon


@functools.lru_cache(maxsize=16)
def _fit_chain(order, horizon, restarts, seed, xatol, maxfev, scale, objective):
    target = causal_target(ramp_kernel(horizon))
    chain = []
    prev = None
    for q in range(1, order + 1):
        try:
            pair, report = fit_iir(
                target, q, q, restarts=restarts, seed=seed, xatol=xatol,
                maxfev=maxfev, scale=scale, init=prev, objective=objective,
            )
        except FittingError as exc:
            chain.append(exc)
            continue
        chain.append((pair, report))
        prev = pair
    return tuple(chain)


def fitted_ramp_filters(order: int, opts: FitOptions, n: int):
    """Fits of ``M = Q = 1 .. order`` to the ramp, each warm started from the last.

    Entries are ``(pair, report)`` or the :class:`FittingError` of that order.
    Results are cached per option set.
    """
    k = n if opts.horizon is None else opts.horizon
    return _fit_chain(order, k, opts.restarts, opts.seed, opts.xatol, opts.maxfev, opts.scale, opts.objective)


def _iir_for(cfg: ReconstructionConfig) -> IirFilterPair:
    if cfg.iir is not None:
        return cfg.iir
    last = fitted_ramp_filters(cfg.iir_order, cfg.fit, cfg.n)[-1]
    if isinstance(last, TomoError):
        raise last
    return last[0]


def filter_sinogram(sino: Sinogram, cfg: ReconstructionConfig, counter=None) -> Sinogram:
    if cfg.filter_mode == "fir":
        data = fir_filter_rows(sino.data, ramp_kernel(cfg.half_length), counter)
    else:
        data = apply_iir_symmetric(sino.data, _iir_for(cfg), counter)
    return sino.with_data(data)


def back_project(filtered: Sinogram, cfg: ReconstructionConfig, counter=None) -> Image:
    if cfg.backproj_mode == "direct":
        return back_project_direct(filtered, cfg.n, counter)
    lin = sinogram_to_linogram(filtered, cfg.n, counter, cfg.interpolation)
    return fht_back_project(lin, counter)


def reconstruct(sino: Sinogram, cfg: ReconstructionConfig, counter: OpCount | None = None) -> Image:
    """Filter every projection, then back project.

    With ``filter_mode="iir"`` and ``backproj_mode="fht"`` the multiplication
    count is ``Theta(N**2)`` and the addition count ``Theta(N**2 log N)``.
    """
    if not isinstance(sino, Sinogram):
        raise ConfigError("reconstruct expects a Sinogram")
    if cfg.num_angles is not None and cfg.num_angles != sino.num_angles:
        raise ConfigError(f"config expects {cfg.num_angles} angles, sinogram has {sino.num_angles}")
    return back_project(filter_sinogram(sino, cfg, counter), cfg, counter)


@functools.lru_cache(maxsize=8)
def _phantom_sinogram(n, p):
    ph = generate_shepp_logan(n)
    return ph, forward_radon(ph, RadonGeometry.for_size(n, p))


def phantom_sinogram(n: int, p: int | None = None):
    """Shepp-Logan phantom of size ``n`` and its sinogram with ``p`` angles."""
    return _phantom_sinogram(int(n), int(p or n))


def time_call(fn, *args, repeats=3, warmup=1):
    """Best wall time of ``fn(*args)`` over ``repeats`` runs and its last result."""
    for _ in range(warmup):
        out = fn(*args)
    best = np.inf
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_order_sweep(n: int, p: int | None, orders, opts: FitOptions | None = None):
    """RMSE against the phantom for IIR filters of each order, direct back projection.

    Returns a list of dicts with keys ``order``, ``rmse``, ``fit_mse``,
    ``status``; a final row with ``order = "fir"`` holds the FIR baseline.
    A failed fit is reported in its row and does not stop the sweep.
    """
    orders = list(orders)
    if not orders:
        raise ConfigError("order sweep needs at least one order")
    opts = opts or FitOptions()
    ph, sino = phantom_sinogram(n, p)
    chain = fitted_ramp_filters(max(orders), opts, n)
    rows = []
    for q in orders:
        item = chain[q - 1]
        if isinstance(item, TomoError):
            rows.append({"order": q, "rmse": float("nan"), "fit_mse": float("nan"), "status": item.kind})
            continue
        pair, report = item
        cfg = ReconstructionConfig(n, p, "iir", iir=pair, backproj_mode="direct", fit=opts)
        rows.append({"order": q, "rmse": rmse(reconstruct(sino, cfg), ph), "fit_mse": report.mse, "status": "ok"})
    fir = ReconstructionConfig(n, p, "fir", backproj_mode="direct")
    rows.append({"order": "fir", "rmse": rmse(reconstruct(sino, fir), ph), "fit_mse": 0.0, "status": "ok"})
    return rows


@dataclass(frozen=True)
class BenchRecord:
    n: int
    mode: str
    seconds: float
    backproj_seconds: float
    additions: int
    multiplications: int
    rmse: float

    def __post_init__(self):
        if not self.seconds > 0:
            raise ValueError("time must be positive")

    def as_row(self):
        return {
            "n": self.n,
            "mode": self.mode,
            "seconds": self.seconds,
            "backproj_seconds": self.backproj_seconds,
            "additions": self.additions,
            "multiplications": self.multiplications,
            "rmse": self.rmse,
        }


def run_size_sweep(sizes, modes=BACKPROJ_MODES, filter_mode="fir", iir_order=3, repeats=3, p_factor=1):
    """Back projection modes across image sizes, filtering fixed.

    Each record carries the full reconstruction time, the time of the back
    projection stage alone (linogram resampling excluded), the instrumented
    operation counts and the RMSE against the phantom.
    """
    records = []
    for n in sizes:
        ph, sino = phantom_sinogram(n, p_factor * n)
        for mode in modes:
            cfg = ReconstructionConfig(n, p_factor * n, filter_mode, iir_order=iir_order, backproj_mode=mode)
            ops = OpCount()
            img = reconstruct(sino, cfg, ops)
            seconds, _ = time_call(reconstruct, sino, cfg, repeats=repeats)
            filtered = filter_sinogram(sino, cfg)
            if mode == "fht":
                lin = sinogram_to_linogram(filtered, n, interpolation=cfg.interpolation)
                bp_seconds, _ = time_call(fht_back_project, lin, repeats=repeats)
            else:
                bp_seconds, _ = time_call(back_project_direct, filtered, n, repeats=repeats)
            records.append(BenchRecord(n, mode, seconds, bp_seconds, ops.adds, ops.mults, rmse(img, ph)))
    return records


def with_mode(cfg: ReconstructionConfig, **changes) -> ReconstructionConfig:
    return replace(cfg, **changes)
