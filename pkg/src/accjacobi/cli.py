"""``accjacobi-bench``: run solvers on one instance and write CSV traces.

Exit status is 0 only if every solver converged and every requested
verification passed.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import BenchSpec, format_summary, run_benchmark


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on or off, got {value!r}")
    return value == "on"


def _k0(value: str) -> int:
    k = int(value)
    if k < 2:
        raise argparse.ArgumentTypeError(f"--k0 must be >= 2, got {k}")
    return k


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="accjacobi-bench", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", metavar="PATH.mtx", help="Matrix Market coordinate real file")
    src.add_argument("--graph", metavar="PATH.edges", help="edge list; the graph Laplacian is solved")
    src.add_argument("--gen", metavar="sdd:N", help="synthetic strictly diagonally dominant system")
    p.add_argument("--rhs", metavar="{ones|consistent:SEED}",
                   help="right-hand side (default: ones for --gen, consistent:<seed> otherwise)")
    p.add_argument("--solver", action="append", dest="solvers", default=[],
                   metavar="{jacobi|wjacobi[:OMEGA|opt]|cg|pcg|accjacobi}",
                   help="repeatable; default depends on the instance source")
    p.add_argument("--restart", type=_on_off, default=True, metavar="{on|off}")
    p.add_argument("--k0", type=_k0, default=2, help="initial restart prohibition period (>= 2)")
    p.add_argument("--j", choices=("diag", "block"), default="diag", help="proximal matrix J")
    p.add_argument("--partitions", type=int, default=1, help="number of row blocks")
    p.add_argument("--workers", type=int, default=1, help="threads used for the block updates")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--maxiter", type=int, default=5000)
    p.add_argument("--out", default="bench_out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verify-s", action="store_true", help="estimate lambda_min(J - Q)")
    p.add_argument("--verify-bounds", action="store_true", help="check the accelerated trace against its guarantee")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        spec = BenchSpec(
            matrix=args.matrix, graph=args.graph, gen=args.gen, rhs=args.rhs, solvers=args.solvers,
            tol=args.tol, maxiter=args.maxiter, j=args.j, partitions=args.partitions, restart=args.restart,
            k0=args.k0, out=args.out, seed=args.seed, workers=args.workers,
            verify_s=args.verify_s, verify_bounds=args.verify_bounds,
        )
        records, ok = run_benchmark(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for rec in records:
        print(format_summary(rec))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
