"""Compare the compiled kernels with the pure numpy fallback.

Usage::

    python benchmarks/bench_backends.py --sizes 64,128,256 --out bench.csv

Writes one CSV row per kernel, size and backend with the best wall time and
the speedup over numpy. Pin numeric libraries to one thread for stable
numbers (``OMP_NUM_THREADS=1``).
"""
import argparse
import csv
import sys

from houghfbp import _backend
from houghfbp.bench import bench_backends

COLUMNS = ["kernel", "n", "backend", "seconds", "speedup"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    if len(_backend.available()) < 2:
        sys.stderr.write("compiled kernels not built; run `python setup.py build_ext --inplace`\n")
        return 1
    sizes = [int(v) for v in args.sizes.split(",") if v.strip()]
    rows = bench_backends(sizes, args.repeats)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        w = csv.DictWriter(fh, COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
