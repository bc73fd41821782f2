"""Baseline solvers: Jacobi, weighted Jacobi, CG and diagonally preconditioned CG.

Every solver stops on the true relative residual ``||b - Qx|| / ||b||``
(recomputed from ``x``, never from a recursively updated residual), so traces
from different solvers are directly comparable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .eigen import DENSE_EIG_MAX_N, extreme_eigenvalues
from .sparse_core import SparseMatrixCsr, as_vector, extract_diagonal, matvec, objective_from_product

DIVERGENCE_THRESHOLD = 1e8


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAXITER = "MaxIterReached"
    DIVERGED = "Diverged"

    def __str__(self):
        return self.value


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-4
    maxiter: int = 5000
    record_trace: bool = True
    record_objective: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.maxiter < 1:
            raise ValueError(f"maxiter must be >= 1, got {self.maxiter}")


class TraceRow(NamedTuple):
    iter: int
    rel_residual: float
    objective: float | None
    restart: bool = False


@dataclass
class SolveReport:
    status: Status
    iterations: int
    x: np.ndarray
    trace: list[TraceRow] = field(default_factory=list)
    restarts: list[int] = field(default_factory=list)
    solver: str = ""
    final_residual: float = float("nan")

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def residuals(self) -> np.ndarray:
        return np.array([row.rel_residual for row in self.trace])

    def objectives(self) -> np.ndarray:
        return np.array([np.nan if row.objective is None else row.objective for row in self.trace])


class _Recorder:
    """Shared stopping rule and trace bookkeeping."""

    def __init__(self, b: np.ndarray, cfg: SolverConfig):
        self.b = b
        self.nb = float(np.linalg.norm(b))
        if self.nb == 0:
            raise SolverError("b = 0: the relative-residual stopping rule is undefined")
        self.cfg = cfg
        self.trace: list[TraceRow] = []
        self.last = float("nan")

    def record(self, t: int, x: np.ndarray, r: np.ndarray, qx: np.ndarray | None, restart=False) -> Status | None:
        """Log iteration ``t`` with residual vector ``r = b - Qx``; return a final status or None."""
        rel = float(np.linalg.norm(r) / self.nb)
        self.last = rel
        if self.cfg.record_trace:
            obj = objective_from_product(x, qx, self.b) if (self.cfg.record_objective and qx is not None) else None
            self.trace.append(TraceRow(t, rel, obj, restart))
        if rel <= self.cfg.tol:
            return Status.CONVERGED
        if not np.isfinite(rel) or rel > DIVERGENCE_THRESHOLD:
            return Status.DIVERGED
        if t >= self.cfg.maxiter:
            return Status.MAXITER
        return None

    def mark_restart(self):
        if self.cfg.record_trace:
            self.trace[-1] = self.trace[-1]._replace(restart=True)

    def report(self, status, t, x, solver, restarts=()) -> SolveReport:
        return SolveReport(status, t, x, self.trace, list(restarts), solver, self.last)


def _setup(Q: SparseMatrixCsr, b, x0, cfg):
    b = as_vector(b, Q.n, "b")
    x = np.zeros(Q.n) if x0 is None else as_vector(x0, Q.n, "x0").copy()
    return b, x, cfg or SolverConfig()


def _positive_diagonal(Q: SparseMatrixCsr) -> np.ndarray:
    d = extract_diagonal(Q)
    bad = np.flatnonzero(d <= 0)
    if len(bad):
        raise SolverError(f"Q[{bad[0]},{bad[0]}] = {d[bad[0]]!r}; Jacobi-type methods need a positive diagonal")
    return d


def _jacobi_loop(Q, b, x, d, step, cfg, name, callback):
    rec = _Recorder(b, cfg)
    t = 0
    while True:
        qx = matvec(Q, x)
        r = b - qx
        status = rec.record(t, x, r, qx)
        if status is not None:
            return rec.report(status, t, x, name)
        x = step(x, r, d)
        t += 1
        if callback is not None:
            callback(t, x)


def jacobi_solve(Q, b, x0=None, cfg: SolverConfig | None = None, callback: Callable | None = None) -> SolveReport:
    """Classical Jacobi: ``x <- x + D^{-1}(b - Qx)``."""
    b, x, cfg = _setup(Q, b, x0, cfg)
    d = _positive_diagonal(Q)
    return _jacobi_loop(Q, b, x, d, lambda x, r, d: x + r / d, cfg, "jacobi", callback)


def weighted_jacobi_solve(
    Q, b, x0=None, omega: float = 1.0, cfg: SolverConfig | None = None, callback: Callable | None = None
) -> SolveReport:
    """Weighted Jacobi: ``x <- x + omega D^{-1}(b - Qx)``."""
    if not omega > 0:
        raise SolverError(f"omega must be positive, got {omega}")
    b, x, cfg = _setup(Q, b, x0, cfg)
    d = _positive_diagonal(Q)
    return _jacobi_loop(Q, b, x, d, lambda x, r, d: x + omega * (r / d), cfg, "wjacobi", callback)


def optimal_weight(Q: SparseMatrixCsr, maxiter: int = 500, tol: float = 1e-8) -> float:
    """``2 / (lambda_min + lambda_max)`` of ``D^{-1} Q``.

    The extreme eigenvalues come from the symmetric similar matrix
    ``D^{-1/2} Q D^{-1/2}``: dense ``eigvalsh`` up to ``DENSE_EIG_MAX_N`` rows,
    power iteration and shifted power iteration beyond.  Raises
    :class:`~accjacobi.eigen.EigenEstimateError` (carrying the partial
    estimates) when power iteration does not settle.
    """
    d = _positive_diagonal(Q)
    s = 1.0 / np.sqrt(d)
    if Q.n <= DENSE_EIG_MAX_N:
        ev = np.linalg.eigvalsh(s[:, None] * Q.to_dense() * s[None, :])
        return 2.0 / (ev[0] + ev[-1])
    lam_min, lam_max = extreme_eigenvalues(lambda v: s * matvec(Q, s * v), Q.n, maxiter, tol)
    return 2.0 / (lam_min + lam_max)


def cg_solve(Q, b, x0=None, cfg: SolverConfig | None = None, callback: Callable | None = None) -> SolveReport:
    return _cg(Q, b, x0, cfg, None, "cg", callback)


def pcg_diag_solve(Q, b, x0=None, cfg: SolverConfig | None = None, callback: Callable | None = None) -> SolveReport:
    """CG preconditioned with ``M = diag(Q)``; stops on the unpreconditioned residual."""
    d = _positive_diagonal(Q)
    return _cg(Q, b, x0, cfg, d, "pcg", callback)


def _cg(Q, b, x0, cfg, d, name, callback):
    b, x, cfg = _setup(Q, b, x0, cfg)
    rec = _Recorder(b, cfg)
    qx = matvec(Q, x)
    r = b - qx
    status = rec.record(0, x, r, qx)
    if status is not None:
        return rec.report(status, 0, x, name)
    z = r if d is None else r / d
    p = z.copy()
    rz = float(np.dot(r, z))
    t = 0
    while True:
        qp = matvec(Q, p)
        pqp = float(np.dot(p, qp))
        if not pqp > 0:
            raise SolverError(
                f"<p, Qp> = {pqp:.3e} at iteration {t + 1}: Q is not positive definite on the "
                "Krylov space or b is inconsistent"
            )
        step = rz / pqp
        x = x + step * p
        r = r - step * qp
        t += 1
        if callback is not None:
            callback(t, x)
        qx = matvec(Q, x)
        status = rec.record(t, x, b - qx, qx)
        if status is not None:
            return rec.report(status, t, x, name)
        z = r if d is None else r / d
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
