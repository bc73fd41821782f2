"""Check the convergence guarantees of accelerated Jacobi on seeded SPD instances.

For each instance prints the worst slack of the O(1/t^2) objective bound
(no restart) and of the descent property (with restart).  A nonzero exit
status means some check failed.
"""

import argparse
import sys

from accjacobi.bench import verify_bounds
from accjacobi.matrix_io import gen_random_spd, gen_sdd
from accjacobi.proximal import build_j_diag
from accjacobi.solvers_accel import acc_jacobi_solve
from accjacobi.solvers_classic import SolverConfig


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--iters", type=int, default=500)
    args = p.parse_args(argv)

    sizes = (8, 16, 32, 64)
    instances = [
        gen_random_spd(sizes[k % 4], seed=100 + k, cond=None if k % 2 == 0 else 10.0 ** (1 + k % 3))
        for k in range(args.count)
    ]
    instances.append(gen_sdd(50))
    cfg = SolverConfig(tol=1e-300, maxiter=args.iters)
    ok = True
    for inst in instances:
        J = build_j_diag(inst.Q)
        line = [f"{inst.label:<14}"]
        for restart in (False, True):
            rep = acc_jacobi_solve(inst.Q, inst.b, J, cfg=cfg, restart=restart)
            v = verify_bounds(rep, inst, J)
            ok &= v.passed
            line.append(f"{v.kind:<10} {'pass' if v.passed else 'FAIL'} (max violation {v.max_violation:.2e})")
        print("  ".join(line))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
