"""Proximal matrices ``J`` for which ``S = J - Q`` is positive semidefinite.

With such a ``J`` the accelerated step ``x = y + J^{-1}(b - Q y)`` needs only
diagonal scaling (diagonal ``J``) or independent small solves (block-diagonal
``J``), both of which split across row blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .eigen import DENSE_EIG_MAX_N, power_iteration
from .sparse_core import DimensionError, SparseMatrixCsr, extract_diagonal, matvec

NORM_SAFETY = 1.0 + 1e-6


class ProximalError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Contiguous row blocks ``offsets[i]:offsets[i+1]``."""

    offsets: tuple[int, ...]

    def __post_init__(self):
        off = tuple(int(o) for o in self.offsets)
        object.__setattr__(self, "offsets", off)
        if len(off) < 2 or off[0] != 0:
            raise ValueError(f"offsets must start at 0 and define at least one block: {off}")
        if any(b <= a for a, b in zip(off, off[1:])):
            raise ValueError(f"every block must be nonempty: {off}")

    @property
    def s(self) -> int:
        return len(self.offsets) - 1

    @property
    def n(self) -> int:
        return self.offsets[-1]

    def blocks(self):
        return list(zip(self.offsets[:-1], self.offsets[1:]))


@dataclass(frozen=True, eq=False)
class ProxMatrix:
    """Diagonal or block-diagonal SPD matrix ``J``.

    Block-diagonal matrices keep their dense blocks and Cholesky factors, so
    ``solve`` costs one triangular solve pair per block.
    """

    kind: str
    n: int
    diag: np.ndarray | None = None
    partition: Partition | None = None
    blocks: tuple[np.ndarray, ...] = ()
    factors: tuple = ()

    @classmethod
    def diagonal(cls, d) -> "ProxMatrix":
        d = np.array(d, dtype=np.float64)
        if np.any(~(d > 0)):
            k = int(np.flatnonzero(~(d > 0))[0])
            raise ProximalError(f"diagonal proximal entry {k} is {d[k]!r}; entries must be > 0")
        d.setflags(write=False)
        return cls("diagonal", len(d), diag=d)

    @classmethod
    def block_diagonal(cls, partition: Partition, blocks) -> "ProxMatrix":
        blocks = tuple(np.array(B, dtype=np.float64) for B in blocks)
        if len(blocks) != partition.s:
            raise ValueError(f"{len(blocks)} blocks for a {partition.s}-block partition")
        factors = []
        for i, ((lo, hi), B) in enumerate(zip(partition.blocks(), blocks)):
            if B.shape != (hi - lo, hi - lo):
                raise DimensionError(f"block {i} has shape {B.shape}, expected {(hi - lo, hi - lo)}")
            if not np.array_equal(B, B.T):
                raise ProximalError(f"block {i} is not symmetric")
            try:
                factors.append(sla.cho_factor(B, lower=True, check_finite=True))
            except np.linalg.LinAlgError:
                raise ProximalError(
                    f"block {i} (rows {lo}:{hi}) is not positive definite; "
                    "an off-diagonal block norm was probably underestimated"
                ) from None
        return cls("block", partition.n, partition=partition, blocks=blocks, factors=tuple(factors))

    @property
    def is_diagonal(self) -> bool:
        return self.kind == "diagonal"

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.is_diagonal:
            return self.diag * v
        out = np.empty(self.n)
        for (lo, hi), B in zip(self.partition.blocks(), self.blocks):
            out[lo:hi] = B @ v[lo:hi]
        return out

    def solve_block(self, i: int, r: np.ndarray) -> np.ndarray:
        """``(J^{i,i})^{-1} r`` for block ``i`` (a slice of the diagonal for diagonal ``J``)."""
        if self.is_diagonal:
            raise TypeError("solve_block needs a block-diagonal J; divide by diag directly")
        return sla.cho_solve(self.factors[i], r, check_finite=False)

    def solve(self, r: np.ndarray) -> np.ndarray:
        if self.is_diagonal:
            return r / self.diag
        out = np.empty(self.n)
        for i, (lo, hi) in enumerate(self.partition.blocks()):
            out[lo:hi] = self.solve_block(i, r[lo:hi])
        return out

    def to_dense(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(self.diag)
        return sla.block_diag(*self.blocks)


def build_j_diag(Q: SparseMatrixCsr) -> ProxMatrix:
    """``J_kk = Q_kk + sum_{j != k} |Q_kj|``."""
    rows = np.repeat(np.arange(Q.n), Q.row_nnz())
    off = Q.col_idx != rows
    off_mass = np.bincount(rows[off], weights=np.abs(Q.values[off]), minlength=Q.n)
    d = extract_diagonal(Q) + off_mass
    bad = np.flatnonzero(d <= 0)
    if len(bad):
        k = int(bad[0])
        if d[k] == 0:
            raise ProximalError(f"row {k} of Q is zero; the Jacobi-type update is undefined")
        raise ProximalError(f"J_kk = {d[k]!r} < 0 at row {k}; Q has a negative diagonal entry")
    return ProxMatrix.diagonal(d)


def spectral_norm_est(B, maxiter: int = 200, tol: float = 1e-10) -> float:
    """Largest singular value of ``B`` by power iteration on its smaller Gram matrix.

    ``B`` may be a dense array or a scipy sparse matrix.  The raw estimate is
    returned; callers that need an upper bound inflate it by ``NORM_SAFETY``.
    """
    m, k = B.shape
    if m == 0 or k == 0:
        return 0.0
    if hasattr(B, "nnz"):
        if B.nnz == 0:
            return 0.0
    elif not np.any(B):
        return 0.0
    BT = B.T
    if m < k:
        gram, dim = (lambda v: B @ (BT @ v)), m
    else:
        gram, dim = (lambda v: BT @ (B @ v)), k
    res = power_iteration(gram, dim, maxiter=maxiter, tol=tol)
    return float(np.sqrt(max(res.value, 0.0)))


def exact_spectral_norm(B) -> float:
    """Dense SVD; used as an oracle and for exact-norm construction in tests."""
    B = B.toarray() if hasattr(B, "toarray") else np.asarray(B)
    if B.size == 0:
        return 0.0
    return float(np.linalg.norm(B, 2))


def build_j_block(
    Q: SparseMatrixCsr,
    p: Partition,
    norm: Callable = spectral_norm_est,
    safety: float = NORM_SAFETY,
) -> ProxMatrix:
    """``J^{i,i} = Q^{i,i} + (sum_{j != i} ||Q^{i,j}||_2) I``."""
    if p.n != Q.n:
        raise DimensionError(f"partition covers {p.n} rows but Q is {Q.n}x{Q.n}")
    blocks = []
    spans = p.blocks()
    for lo, hi in spans:
        rows = Q.row_block(lo, hi)
        shift = 0.0
        for lo_j, hi_j in spans:
            if lo_j == lo:
                continue
            sub = rows[:, lo_j:hi_j]
            if sub.nnz:
                shift += norm(sub)
        B = rows[:, lo:hi].toarray()
        if shift:
            B[np.diag_indices_from(B)] += safety * shift
        blocks.append(B)
    return ProxMatrix.block_diagonal(p, blocks)


def check_s_psd(Q: SparseMatrixCsr, J: ProxMatrix, maxiter: int = 1000, tol: float = 1e-10) -> float:
    """Estimate of ``lambda_min(J - Q)``.

    Exact (dense ``eigvalsh``) up to ``DENSE_EIG_MAX_N`` rows, shifted power
    iteration beyond.
    """
    if J.n != Q.n:
        raise DimensionError(f"J is {J.n}x{J.n} but Q is {Q.n}x{Q.n}")
    if Q.n <= DENSE_EIG_MAX_N:
        S = J.to_dense() - Q.to_dense()
        return float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])

    def apply_s(v):
        return J.apply(v) - matvec(Q, v)

    # the dominant eigenvalue in magnitude bounds the spectrum from above
    top = power_iteration(apply_s, Q.n, maxiter=maxiter, tol=tol)
    shift = abs(top.value)
    low = power_iteration(lambda v: shift * v - apply_s(v), Q.n, maxiter=maxiter, tol=tol)
    return float(shift - low.value)
