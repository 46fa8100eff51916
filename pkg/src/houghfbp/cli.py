"""Command line interface.

Every subcommand takes explicit flags for its configuration. On failure the
last line written to stderr is a single JSON object ``{"error": kind,
"message": text}`` and the exit code is nonzero (2 for bad input, 1 for
anything else).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_fit_flags(p):
    g = p.add_argument_group("filter fitting")
    g.add_argument("--horizon", type=int, default=None, help="fit horizon K (default: image size)")
    g.add_argument("--restarts", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--xatol", type=float, default=1e-10, help="simplex diameter at which a run stops")
    g.add_argument("--maxfev", type=int, default=20000, help="evaluations per simplex run")
    g.add_argument("--objective", choices=("impulse", "step"), default="impulse")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports bad usage through the JSON error line."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: {message}")


def build_parser():
    ap = _Parser(prog="houghfbp", description=__doc__.splitlines()[0])
    ap.add_argument("--single-threaded", action="store_true",
                    help="pin numeric libraries to one thread (for clean timings)")
    ap.add_argument("--backend", choices=("cython", "python"), default=None,
                    help="kernel implementation (default: compiled if built)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write a Shepp-Logan phantom image")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("project", help="forward project an image into a sinogram")
    p.add_argument("--image", required=True)
    p.add_argument("--angles", type=int, default=None, help="projection count P (default: N)")
    p.add_argument("--bins", type=int, default=None, help="detector bins R (default: covers diagonal)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit-filter", help="fit recursive ramp filter coefficients")
    p.add_argument("--order", type=int, required=True, help="M = Q")
    p.add_argument("--size", type=int, required=True, help="image size N (default horizon)")
    _add_fit_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reconstruct", help="filtered back projection of a sinogram")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--filter", choices=("fir", "iir"), default="fir")
    p.add_argument("--fir-half-length", type=int, default=None)
    p.add_argument("--order", type=int, default=3, help="IIR order M = Q when fitting")
    p.add_argument("--coeffs", default=None, help="coefficient file; skips fitting")
    p.add_argument("--backproj", choices=("direct", "fht"), default="direct")
    p.add_argument("--interpolation", choices=("cubic", "linear"), default="cubic")
    p.add_argument("--reference", default=None, help="image to report RMSE against")
    _add_fit_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep-order", help="RMSE against IIR order (direct back projection)")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--angles", type=int, default=None)
    p.add_argument("--orders", type=_int_list, required=True, help="e.g. 1,2,3,4,5")
    _add_fit_flags(p)
    p.add_argument("--out", default="-", help="CSV path or - for stdout")

    p = sub.add_parser("sweep-size", help="RMSE and time against image size per back projection mode")
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--modes", type=_str_list, default=["direct", "fht"])
    p.add_argument("--filter", choices=("fir", "iir"), default="fir")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", default="-")

    p = sub.add_parser("bench", help="time compiled against pure numpy kernels")
    p.add_argument("--sizes", type=_int_list, default=[64, 128, 256])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", default="-")
    return ap


def _write_csv(rows, path, columns):
    fh = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fit_options(args):
    from .pipeline import FitOptions

    return FitOptions(args.horizon, args.restarts, args.seed, args.xatol, args.maxfev, objective=args.objective)


def cmd_phantom(args):
    from .io import save_image
    from .phantom import generate_shepp_logan

    save_image(args.out, generate_shepp_logan(args.size))


def cmd_project(args):
    from .io import load_image, save_sinogram
    from .radon import RadonGeometry, default_num_bins, forward_radon

    img = load_image(args.image)
    geom = RadonGeometry(args.angles or img.size, args.bins or default_num_bins(img.size))
    save_sinogram(args.out, forward_radon(img, geom))


def cmd_fit_filter(args):
    from .errors import TomoError
    from .io import save_coeffs
    from .pipeline import fitted_ramp_filters

    last = fitted_ramp_filters(args.order, _fit_options(args), args.size)[-1]
    if isinstance(last, TomoError):
        raise last
    pair, report = last
    save_coeffs(args.out, pair, report)
    print(f"order={args.order} mse={report.mse!r} horizon={report.horizon}")


def cmd_reconstruct(args):
    from .io import load_coeffs, load_image, load_sinogram, save_image
    from .pipeline import ReconstructionConfig, reconstruct
    from .types import rmse

    sino = load_sinogram(args.sinogram)
    iir = load_coeffs(args.coeffs)[0] if args.coeffs else None
    cfg = ReconstructionConfig(
        args.size, sino.num_angles, args.filter, args.fir_half_length, args.order, iir,
        args.backproj, _fit_options(args), args.interpolation,
    )
    img = reconstruct(sino, cfg)
    save_image(args.out, img)
    if args.reference:
        print(f"rmse={rmse(img, load_image(args.reference))!r}")


def cmd_sweep_order(args):
    from .pipeline import run_order_sweep

    rows = run_order_sweep(args.size, args.angles, args.orders, _fit_options(args))
    _write_csv(rows, args.out, ["order", "rmse", "fit_mse", "status"])


def cmd_sweep_size(args):
    from .pipeline import run_size_sweep

    recs = run_size_sweep(args.sizes, args.modes, args.filter, args.order, args.repeats)
    cols = ["n", "mode", "seconds", "backproj_seconds", "additions", "multiplications", "rmse"]
    _write_csv([r.as_row() for r in recs], args.out, cols)


def cmd_bench(args):
    from .bench import bench_backends

    rows = bench_backends(args.sizes, args.repeats)
    _write_csv(rows, args.out, ["kernel", "n", "backend", "seconds", "speedup"])


COMMANDS = {
    "phantom": cmd_phantom,
    "project": cmd_project,
    "fit-filter": cmd_fit_filter,
    "reconstruct": cmd_reconstruct,
    "sweep-order": cmd_sweep_order,
    "sweep-size": cmd_sweep_size,
    "bench": cmd_bench,
}


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", str(exc), 2)
    if args.single_threaded:
        for var in _THREAD_VARS:
            os.environ[var] = "1"
    from . import _backend
    from .errors import ConfigError, TomoError

    try:
        if args.backend is not None:
            if args.backend not in _backend.available():
                raise ConfigError(f"{args.backend} kernels are not available; build the extension")
            _backend.use(args.backend)
        COMMANDS[args.command](args)
    except TomoError as exc:
        return _fail(exc.kind, str(exc), 2)
    except OSError as exc:
        return _fail("io", str(exc), 1)
    except Exception as exc:  # last resort: keep the error line machine readable
        return _fail("internal", f"{type(exc).__name__}: {exc}", 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
