"""Jacobi, weighted Jacobi and accelerated Jacobi on the dense diagonally dominant family.

Writes one CSV trace per solver and size under ``--out`` (columns
iter, rel_residual, objective, restart_flag) and prints a summary table.

    python3 scripts/run_sdd.py --sizes 1000 2000 --out runs/sdd
"""

import argparse
import sys

from accjacobi.bench import BenchSpec, format_summary, run_benchmark


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 3000, 4000, 5000, 6000])
    p.add_argument("--out", default="runs/sdd")
    p.add_argument("--maxiter", type=int, default=5000)
    args = p.parse_args(argv)
    for n in args.sizes:
        spec = BenchSpec(gen=f"sdd:{n}", solvers=["jacobi", "wjacobi:opt", "accjacobi-restart"],
                         maxiter=args.maxiter, out=f"{args.out}/n{n}")
        records, _ = run_benchmark(spec)
        print(f"n = {n}")
        for rec in records:
            print("  " + format_summary(rec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
