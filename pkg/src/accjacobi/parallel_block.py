"""Row-block execution of the accelerated step.

Each block reads the same snapshot of ``y`` and writes only its own slice
of ``x``, so the result does not depend on the number of blocks or on how
they are scheduled.  Blocks run on a thread pool when ``workers > 1``
(scipy's CSR kernel and the triangular solves release the GIL).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .proximal import Partition, ProxMatrix
from .sparse_core import DimensionError, SparseMatrixCsr


def partition_rows(n: int, s: int) -> Partition:
    """``s`` contiguous blocks, sizes differing by at most one, larger blocks first."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    q, rem = divmod(n, s)
    sizes = [q + 1] * rem + [q] * (s - rem)
    return Partition(tuple(np.concatenate([[0], np.cumsum(sizes)]).tolist()))


def load_imbalance(Q: SparseMatrixCsr, p: Partition) -> float:
    """``s * max_i nnz(block i) / nnz(Q)``; 1.0 means perfectly balanced."""
    if p.n != Q.n:
        raise DimensionError(f"partition covers {p.n} rows but Q is {Q.n}x{Q.n}")
    if Q.nnz == 0:
        return 1.0
    per_block = [Q.row_ptr[hi] - Q.row_ptr[lo] for lo, hi in p.blocks()]
    return p.s * max(per_block) / Q.nnz


class BlockWorkspace:
    """Per-block row slices of ``Q``, ``b`` and ``J`` for one partition.

    A diagonal ``J`` is sliced to any partition; a block-diagonal ``J`` must
    have been built for the same partition.
    """

    def __init__(self, Q: SparseMatrixCsr, b, J: ProxMatrix, partition: Partition, workers: int = 1):
        if partition.n != Q.n or J.n != Q.n:
            raise DimensionError("Q, J and the partition must have the same dimension")
        if not J.is_diagonal and J.partition != partition:
            raise ValueError("a block-diagonal J must be built on the workspace partition")
        self.Q = Q
        self.b = np.asarray(b, dtype=np.float64)
        self.J = J
        self.partition = partition
        self.spans = partition.blocks()
        self.rows = [Q.row_block(lo, hi) for lo, hi in self.spans]
        self.b_blocks = [self.b[lo:hi] for lo, hi in self.spans]
        self.j_blocks = [J.diag[lo:hi] for lo, hi in self.spans] if J.is_diagonal else None
        self.workers = workers
        self._pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def _block(self, i: int, y: np.ndarray, x: np.ndarray, r: np.ndarray) -> None:
        lo, hi = self.spans[i]
        ri = self.b_blocks[i] - self.rows[i] @ y
        if self.j_blocks is not None:
            x[lo:hi] = y[lo:hi] + ri / self.j_blocks[i]
        else:
            x[lo:hi] = y[lo:hi] + self.J.solve_block(i, ri)
        r[lo:hi] = ri

    def step(self, y: np.ndarray):
        """Return ``(x, b - Q y)`` with every block updated from the same ``y``."""
        x = np.empty(self.Q.n)
        r = np.empty(self.Q.n)
        if self._pool is None:
            for i in range(len(self.spans)):
                self._block(i, y, x, r)
        else:
            # list() propagates worker exceptions and acts as the barrier
            list(self._pool.map(lambda i: self._block(i, y, x, r), range(len(self.spans))))
        return x, r

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def parallel_accel_step(ws: BlockWorkspace, Q: SparseMatrixCsr, b, y) -> np.ndarray:
    if Q is not ws.Q:
        raise ValueError("workspace was built for a different matrix")
    if not np.array_equal(np.asarray(b, dtype=np.float64), ws.b):
        raise ValueError("workspace was built for a different right-hand side")
    return ws.step(np.asarray(y, dtype=np.float64))[0]
