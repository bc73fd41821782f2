import numpy as np
import pytest

from accjacobi.matrix_io import (
    EdgeList,
    ProblemInstance,
    gen_consistent_rhs,
    gen_random_spd,
    gen_sdd,
    grid_graph,
    laplacian_from_edges,
    preferential_tree,
    random_bipartite,
    random_tree,
    rng_from_seed,
)
from accjacobi.sparse_core import SparseMatrixCsr

SPD_SIZES = (8, 16, 32, 64)


def spd_suite():
    """20 seeded SPD instances, five per size, alternating two spectra families."""
    out = []
    for k in range(20):
        n = SPD_SIZES[k % 4]
        cond = None if k % 2 == 0 else 10.0 ** (1 + k % 3)
        out.append(gen_random_spd(n, seed=100 + k, cond=cond))
    return out


def theory_suite():
    """The 20 random SPD instances plus the n = 50 diagonally dominant system."""
    return spd_suite() + [gen_sdd(50)]


def random_spsd(n, rank, seed) -> ProblemInstance:
    rng = rng_from_seed(seed)
    G = rng.standard_normal((n, rank))
    A = G @ G.T
    A = 0.5 * (A + A.T)
    inst = gen_consistent_rhs(SparseMatrixCsr.from_dense(A), seed + 7)
    inst.label = f"spsd-{n}-{rank}-{seed}"
    return inst


def small_random_graph(n, extra, seed) -> EdgeList:
    """Random tree plus ``extra`` random edges; connected, possibly non-bipartite."""
    rng = rng_from_seed(seed)
    edges = [(k, int(rng.integers(0, k))) for k in range(1, n)]
    for _ in range(extra):
        i, j = (int(v) for v in rng.integers(0, n, 2))
        if i != j:
            edges.append((i, j))
    return EdgeList(n, tuple(edges))


def laplacian_family():
    """Five connected bipartite graphs with n <= 2000 (Jacobi cannot converge on them)."""
    return [
        ("random-tree-2000", random_tree(2000, seed=1)),
        ("pref-tree-1500", preferential_tree(1500, seed=2)),
        ("bipartite-600x900", random_bipartite(600, 900, extra=600, seed=3)),
        ("grid-30x40", grid_graph(30, 40, drop=0.3, seed=4)),
        ("pref-tree-2000", preferential_tree(2000, seed=5)),
    ]


def dense_solve(inst: ProblemInstance) -> np.ndarray:
    return np.linalg.solve(inst.Q.to_dense(), inst.b)


def dense_objective(A, b, x):
    return 0.5 * x @ A @ x - b @ x


@pytest.fixture(scope="session")
def spd_instances():
    return spd_suite()


@pytest.fixture(scope="session")
def path3():
    return laplacian_from_edges(EdgeList(3, ((0, 1), (1, 2))))


@pytest.fixture
def sdd3():
    return gen_sdd(3)
