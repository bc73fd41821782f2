"""CG, diagonal PCG, Jacobi and accelerated Jacobi on graph Laplacians.

With no ``--graph`` arguments a built-in family of seeded random connected
bipartite graphs is used (trees, a bipartite graph and a thinned grid).
Edge-list files (first line ``n m``, then ``i j`` per edge) can be passed
instead, e.g. SuiteSparse graphs converted by the user.
"""

import argparse
import sys
import tempfile
from pathlib import Path

from accjacobi.bench import BenchSpec, format_summary, run_benchmark
from accjacobi.matrix_io import grid_graph, preferential_tree, random_bipartite, random_tree, write_edge_list


def default_family():
    return {
        "random-tree-2000": random_tree(2000, seed=1),
        "pref-tree-1500": preferential_tree(1500, seed=2),
        "bipartite-600x900": random_bipartite(600, 900, extra=600, seed=3),
        "grid-30x40": grid_graph(30, 40, drop=0.3, seed=4),
        "pref-tree-2000": preferential_tree(2000, seed=5),
    }


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--graph", action="append", default=[], help="edge-list file (repeatable)")
    p.add_argument("--out", default="runs/laplacian")
    p.add_argument("--seed", type=int, default=0, help="seed of the consistent right-hand side")
    args = p.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(g) for g in args.graph]
        if not paths:
            for name, g in default_family().items():
                paths.append(Path(tmp) / f"{name}.edges")
                write_edge_list(g, paths[-1])
        for path in paths:
            spec = BenchSpec(graph=str(path), solvers=["jacobi", "cg", "pcg", "accjacobi-restart"],
                             seed=args.seed, out=f"{args.out}/{path.stem}")
            records, _ = run_benchmark(spec)
            print(path.stem)
            for rec in records:
                print("  " + format_summary(rec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
