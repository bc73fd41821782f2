"""Compressed-sparse-row matrices and the vector kernels the solvers share.

Symmetric matrices are stored with both triangles present so that any
contiguous row range holds complete rows.  The matrix-vector product is
delegated to scipy's CSR kernel, which accumulates each row sequentially in
ascending column order; the result of a row therefore never depends on how
rows are grouped into blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SparseMatrixCsr:
    """Square real matrix in canonical CSR form.

    Column indices are strictly increasing inside every row and there are no
    explicit duplicates.  Symmetry is not assumed; see :meth:`is_symmetric`.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)

        n = self.n
        if n < 0:
            raise ValueError(f"negative dimension {n}")
        if row_ptr.shape != (n + 1,):
            raise ValueError(f"row_ptr must have length n+1={n + 1}, got {row_ptr.shape}")
        if row_ptr[0] != 0 or row_ptr[-1] != len(col_idx) or len(col_idx) != len(values):
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if len(col_idx) and (col_idx.min() < 0 or col_idx.max() >= n):
            raise ValueError("column index out of range")
        # strictly increasing columns within each row
        steps = np.diff(col_idx)
        row_starts = row_ptr[1:-1]
        inside = np.ones(len(steps), dtype=bool)
        inside[row_starts[(row_starts > 0) & (row_starts < len(col_idx))] - 1] = False
        if np.any(steps[inside] <= 0):
            raise ValueError("column indices must be strictly increasing within each row")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseMatrixCsr":
        """Build from triplets; duplicate (row, col) pairs are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError("triplet arrays must have equal length")
        if len(rows) and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n):
            raise ValueError(f"triplet index out of range for n={n}")
        m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return cls._from_scipy(m)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrixCsr":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        m = sp.csr_matrix(a)
        m.sort_indices()
        return cls._from_scipy(m)

    @classmethod
    def _from_scipy(cls, m) -> "SparseMatrixCsr":
        return cls(m.shape[0], m.indptr, m.indices, m.data)

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def scipy(self) -> sp.csr_matrix:
        m = sp.csr_matrix((self.values, self.col_idx, self.row_ptr), shape=self.shape)
        m.has_sorted_indices = True
        m.has_canonical_format = True
        return m

    def row_block(self, lo: int, hi: int) -> sp.csr_matrix:
        """Rows ``lo:hi`` as a scipy CSR matrix sharing this matrix's row order."""
        a, b = self.row_ptr[lo], self.row_ptr[hi]
        m = sp.csr_matrix(
            (self.values[a:b], self.col_idx[a:b], self.row_ptr[lo : hi + 1] - a),
            shape=(hi - lo, self.n),
        )
        m.has_sorted_indices = True
        m.has_canonical_format = True
        return m

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def to_dense(self) -> np.ndarray:
        return self.scipy.toarray()

    def is_symmetric(self) -> bool:
        """Exact check: every stored (i, j, v) has a stored (j, i, v)."""
        t = self.scipy.T.tocsr()
        t.sort_indices()
        return (
            np.array_equal(t.indptr, self.row_ptr)
            and np.array_equal(t.indices, self.col_idx)
            and np.array_equal(t.data, self.values)
        )

    def __repr__(self) -> str:
        return f"SparseMatrixCsr(n={self.n}, nnz={self.nnz})"


def as_vector(x, n: int | None = None, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and len(v) != n:
        raise DimensionError(f"{name} has length {len(v)}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def matvec(A: SparseMatrixCsr, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise DimensionError(f"matrix is {A.n}x{A.n} but vector has shape {x.shape}")
    return A.scipy @ x


def extract_diagonal(A: SparseMatrixCsr) -> np.ndarray:
    rows = np.repeat(np.arange(A.n), A.row_nnz())
    on_diag = A.col_idx == rows
    d = np.zeros(A.n)
    d[rows[on_diag]] = A.values[on_diag]
    return d


def rel_residual(Q: SparseMatrixCsr, b, x) -> float:
    """``||b - Qx|| / ||b||`` in the Euclidean norm."""
    b = np.asarray(b, dtype=np.float64)
    nb = np.linalg.norm(b)
    if nb == 0:
        raise ValueError("relative residual is undefined for b = 0")
    return float(np.linalg.norm(b - matvec(Q, x)) / nb)


def objective(Q: SparseMatrixCsr, b, x) -> float:
    """The quadratic ``0.5 <x, Qx> - <b, x>`` whose minimizers solve ``Qx = b``."""
    x = np.asarray(x, dtype=np.float64)
    return float(0.5 * np.dot(x, matvec(Q, x)) - np.dot(b, x))


def objective_from_product(x: np.ndarray, qx: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.dot(x, qx) - np.dot(b, x))


def s_inner(J, Q: SparseMatrixCsr, u, v) -> float:
    """``<u, (J - Q) v>`` without forming ``J - Q``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.dot(u, J.apply(v)) - np.dot(u, matvec(Q, v)))
