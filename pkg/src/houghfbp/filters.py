"""Ramp filtering: exact FIR kernel and its fitted recursive approximation.

The band-limited discrete ramp kernel is ``h(0) = 1/4``, ``h(n) = 0`` for even
``n != 0`` and ``h(n) = -1 / (n pi)**2`` for odd ``n``. It is split into a
causal half ``h+`` (with ``h+(0) = h(0) / 2``) and its mirror. A short
recursive filter fitted to ``h+`` is run once left to right and once right to
left, and the two outputs are added, which costs ``O(M + Q)`` per sample
instead of ``O(L)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeResult, minimize
from scipy.signal import fftconvolve, lfilter

from . import _backend
from .counting import tally
from .errors import FittingError, ParameterError

__all__ = [
    "FirKernel",
    "IirFilterPair",
    "FitReport",
    "ramp_kernel",
    "fir_filter_row",
    "fir_filter_rows",
    "causal_target",
    "iir_impulse_response",
    "fit_iir",
    "fit_ramp_iir",
    "apply_iir_symmetric",
    "spectral_radius",
]


@dataclass(frozen=True)
class FirKernel:
    """Symmetric kernel with taps ``h(-L0) .. h(L0)``."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size % 2 == 0:
            raise ParameterError("FIR kernel needs an odd number of taps")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def half_length(self) -> int:
        return self.taps.size // 2

    def __len__(self):
        return self.taps.size


# 1 / pi**2, correctly rounded; one division keeps each tap within an ulp
_INV_PI2 = 0.10132118364233778


def ramp_kernel(half_length: int) -> FirKernel:
    """Discrete ramp kernel with ``2 * half_length + 1`` taps.

    Examples
    --------
    >>> ramp_kernel(0).taps
    array([0.25])
    >>> ramp_kernel(2).taps.round(6)
    array([ 0.      , -0.101321,  0.25    , -0.101321,  0.      ])
    """
    if int(half_length) != half_length or half_length < 0:
        raise ParameterError(f"half length must be a non-negative integer, got {half_length}")
    n = np.arange(-half_length, half_length + 1)
    taps = np.zeros(n.size)
    odd = n % 2 == 1
    taps[odd] = -_INV_PI2 / (n[odd] * n[odd]).astype(np.float64)
    taps[half_length] = 0.25
    return FirKernel(taps)


def fir_filter_rows(rows, kernel: FirKernel, counter=None) -> np.ndarray:
    """Convolve each row with ``kernel``, zero padded, same length out."""
    rows = np.asarray(rows, dtype=np.float64)
    taps = kernel.taps
    if rows.shape[-1] == 0:
        return rows.copy()
    shape = (1,) * (rows.ndim - 1) + (taps.size,)
    out = fftconvolve(rows, taps.reshape(shape), mode="full", axes=-1)
    lo = kernel.half_length
    tally(counter, adds=rows.size * taps.size, mults=rows.size * taps.size)
    return out[..., lo:lo + rows.shape[-1]]


def fir_filter_row(row, kernel: FirKernel) -> np.ndarray:
    return fir_filter_rows(np.asarray(row, dtype=np.float64)[None, :], kernel)[0]


def causal_target(kernel: FirKernel) -> np.ndarray:
    """Causal half ``h+(0..L0)`` of a symmetric kernel, centre tap halved."""
    h = kernel.taps[kernel.half_length:].copy()
    h[0] *= 0.5
    return h


@dataclass(frozen=True)
class IirFilterPair:
    """Recursive filter shared by the causal and anticausal passes.

    ``y[n] = sum_k b[k] x[n - k] - sum_k a[k - 1] y[n - k]``.
    """

    b: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64).ravel()
        a = np.array(self.a, dtype=np.float64).ravel()
        if b.size < 1:
            raise ParameterError("feedforward order must be at least 1")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
            raise ParameterError("filter coefficients must be finite")
        b.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def feedforward_order(self) -> int:
        return self.b.size

    @property
    def feedback_order(self) -> int:
        return self.a.size

    @property
    def denominator(self) -> np.ndarray:
        return np.concatenate([[1.0], self.a])

    def is_stable(self) -> bool:
        return spectral_radius(self.a) < 1.0

    def params(self) -> np.ndarray:
        return np.concatenate([self.b, self.a])


@dataclass(frozen=True)
class FitReport:
    mse: float
    iterations: int
    evaluations: int
    converged: bool
    horizon: int
    restart: int = 0


def spectral_radius(a) -> float:
    """Largest pole modulus of ``1 + sum a_k z**-k``."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0 or not np.any(a):
        return 0.0
    return float(np.max(np.abs(np.roots(np.concatenate([[1.0], a])))))


def iir_impulse_response(f: IirFilterPair, n_max: int) -> np.ndarray:
    """Outputs ``n = 0 .. n_max`` of the causal filter driven by a unit impulse."""
    x = np.zeros(int(n_max) + 1)
    x[0] = 1.0
    return lfilter(f.b, f.denominator, x)


def _unpack(z, m, gain):
    """Full ``(b, a)`` vector from the free parameters.

    With ``gain`` set, ``b[0]`` is solved for so that the DC gain
    ``sum(b) / (1 + sum(a))`` equals ``gain``; otherwise every entry is free.
    """
    if gain is None:
        return z
    a = z[m - 1:]
    b0 = gain * (1.0 + a.sum()) - z[:m - 1].sum()
    return np.concatenate([[b0], z])


def _pack(p, m, gain):
    return p if gain is None else p[1:]


OBJECTIVES = ("impulse", "step")


def _objective(target, m, gain, kind="impulse", penalty=1e6):
    k = target.size
    impulse = np.zeros(k)
    impulse[0] = 1.0
    if kind == "step":
        target = np.cumsum(target)

    def fn(z):
        p = _unpack(z, m, gain)
        a = p[m:]
        rho = spectral_radius(a)
        if rho >= 1.0:
            # unstable: large value growing with the pole excess
            return penalty * rho
        y = lfilter(p[:m], np.concatenate([[1.0], a]), impulse)
        if kind == "step":
            y = np.cumsum(y)
        return float(np.mean((y - target) ** 2))

    return fn


def _simplex(x0, scale):
    d = x0.size
    sim = np.repeat(x0[None, :], d + 1, axis=0)
    sim[1:] += scale * np.eye(d)
    return sim


def fit_iir(
    target,
    m: int,
    q: int,
    restarts: int = 8,
    seed: int = 0,
    xatol: float = 1e-10,
    maxfev: int = 20000,
    scale: float = 0.1,
    init: IirFilterPair | None = None,
    match_dc: bool = True,
    objective: str = "impulse",
):
    """Fit ``(b, a)`` so the causal impulse response matches ``target``.

    Minimizes the mean-square error over ``n = 0 .. K`` with Nelder-Mead.
    With ``match_dc`` the search is restricted to filters whose DC gain
    equals ``sum(target)``: projections carry most of their energy near zero
    frequency, where the ramp is nearly zero, so a tiny gain error there is
    amplified into a large image offset.
    Restart 0 starts from ``init`` (zero padded to the requested orders) or
    from ``b = [target[0]], a = 0``; the other restarts perturb that start
    with a seeded generator. The best restart wins, lowest index on ties.
    Unstable candidates are penalized; if no restart ends stable a
    :class:`FittingError` is raised.

    Parameters
    ----------
    target : array_like
        Desired impulse response ``h+(0 .. K)``.
    m, q : int
        Feedforward and feedback orders.
    restarts : int
        Number of simplex runs.
    seed : int
        Seed for the restart perturbations.
    xatol : float
        Simplex diameter at which a run stops.
    maxfev : int
        Evaluation budget per run.
    scale : float
        Edge length of the initial simplex and perturbation size.
    init : IirFilterPair, optional
        Warm start, e.g. the solution of a lower order.
    match_dc : bool
        Pin the DC gain to the target's.
    objective : {"impulse", "step"}
        ``"impulse"`` compares impulse responses. ``"step"`` compares their
        running sums, which weights low frequencies more heavily; reported
        ``mse`` is then the step-response error.

    Returns
    -------
    (IirFilterPair, FitReport)
    """
    target = np.asarray(target, dtype=np.float64).ravel()
    if objective not in OBJECTIVES:
        raise ParameterError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    if m < 1 or q < 0:
        raise ParameterError(f"invalid orders M={m}, Q={q}")
    if target.size < m + q:
        raise ParameterError(f"target of length {target.size} cannot pin {m + q} coefficients")
    gain = float(target.sum()) if match_dc else None
    x0 = np.zeros(m + q)
    if init is not None:
        nb = min(m, init.b.size)
        na = min(q, init.a.size)
        x0[:nb] = init.b[:nb]
        x0[m:m + na] = init.a[:na]
    else:
        x0[0] = target[0]
    z0 = _pack(x0, m, gain)
    fn = _objective(target, m, gain, objective)
    rng = np.random.default_rng(seed)
    best = None
    for r in range(max(1, restarts)):
        start = z0 if r == 0 else z0 + scale * rng.standard_normal(z0.size)
        if fn(start) >= 1e6:
            start = z0
        if z0.size == 0:
            res = OptimizeResult(x=z0, fun=fn(z0), nit=0, nfev=1, success=True)
        else:
            res = minimize(
                fn,
                start,
                method="Nelder-Mead",
                options={
                    "xatol": xatol,
                    "fatol": np.inf,
                    "maxfev": maxfev,
                    "maxiter": maxfev,
                    "initial_simplex": _simplex(start, scale),
                },
            )
        res.x = _unpack(res.x, m, gain)
        stable = spectral_radius(res.x[m:]) < 1.0
        if stable and (best is None or res.fun < best[0].fun):
            best = (res, r)
    if best is None:
        raise FittingError(f"no stable M={m}, Q={q} filter found in {restarts} restarts")
    res, r = best
    pair = IirFilterPair(res.x[:m], res.x[m:])
    report = FitReport(
        mse=float(res.fun),
        iterations=int(res.nit),
        evaluations=int(res.nfev),
        converged=bool(res.success),
        horizon=target.size - 1,
        restart=r,
    )
    return pair, report


def fit_ramp_iir(order: int, horizon: int, **opts):
    """Fit ``M = Q = 1 .. order`` in turn, each warm started from the last.

    Returns the list of ``(pair, report)`` for every order; the reported MSE
    can only go down because each start point is the previous optimum.
    """
    target = causal_target(ramp_kernel(horizon))
    out = []
    prev = None
    for q in range(1, order + 1):
        pair, report = fit_iir(target, q, q, init=prev, **opts)
        out.append((pair, report))
        prev = pair
    return out


def apply_iir_symmetric(rows, f: IirFilterPair, counter=None, backend=None) -> np.ndarray:
    """Causal pass plus anticausal pass over the last axis, zero initial state."""
    rows = np.asarray(rows, dtype=np.float64)
    kern = _backend.get(backend)
    out, ops = kern.iir_symmetric(np.ascontiguousarray(rows), f.b, f.a)
    tally(counter, adds=ops, mults=ops)
    return np.asarray(out).reshape(rows.shape)
