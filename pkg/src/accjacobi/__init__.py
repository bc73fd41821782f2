"""Nesterov-accelerated Jacobi-type solvers for symmetric positive semidefinite systems."""

from .matrix_io import (
    EdgeList,
    ProblemInstance,
    gen_consistent_rhs,
    gen_sdd,
    laplacian_from_edges,
    read_edge_list,
    read_matrix_market,
    write_matrix_market,
)
from .parallel_block import BlockWorkspace, load_imbalance, parallel_accel_step, partition_rows
from .proximal import Partition, ProxMatrix, build_j_block, build_j_diag, check_s_psd, spectral_norm_est
from .solvers_accel import AccelState, acc_jacobi_solve, accel_step
from .solvers_classic import (
    SolveReport,
    SolverConfig,
    Status,
    cg_solve,
    jacobi_solve,
    optimal_weight,
    pcg_diag_solve,
    weighted_jacobi_solve,
)
from .sparse_core import SparseMatrixCsr, extract_diagonal, matvec, objective, rel_residual, s_inner

__version__ = "0.1.0"
