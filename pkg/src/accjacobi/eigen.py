"""Power-iteration estimators for extreme eigenvalues of symmetric operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# below this size a dense symmetric eigensolver is cheap and exact
DENSE_EIG_MAX_N = 64


class EigenEstimateError(RuntimeError):
    def __init__(self, msg, estimate=None, iterations=None):
        super().__init__(msg)
        self.estimate = estimate
        self.iterations = iterations


@dataclass(frozen=True)
class PowerResult:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool


def start_vector(n: int) -> np.ndarray:
    # all ones plus a small index-dependent ripple so the start is not
    # orthogonal to the target eigenvector when the ones vector is itself an
    # eigenvector (graph Laplacians, the sdd test family)
    k = np.arange(n)
    v = 1.0 + 1e-2 * (np.mod(k * 0.6180339887498949, 1.0) - 0.5)
    return v / np.linalg.norm(v)


def power_iteration(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    maxiter: int = 500,
    tol: float = 1e-8,
    v0: np.ndarray | None = None,
) -> PowerResult:
    """Dominant eigenvalue of a symmetric operator by the Rayleigh quotient.

    Stops when the relative change of the Rayleigh quotient drops below
    ``tol``.  The operator should be positive semidefinite so that the
    dominant eigenvalue is also the largest.
    """
    v = start_vector(n) if v0 is None else v0 / np.linalg.norm(v0)
    lam = float(np.dot(v, apply(v)))
    for it in range(1, maxiter + 1):
        w = apply(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return PowerResult(0.0, v, it, True)
        v = w / nw
        new = float(np.dot(v, apply(v)))
        if abs(new - lam) <= tol * max(abs(new), np.finfo(float).tiny):
            return PowerResult(new, v, it, True)
        lam = new
    return PowerResult(lam, v, maxiter, False)


def extreme_eigenvalues(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    maxiter: int = 500,
    tol: float = 1e-8,
    strict: bool = True,
) -> tuple[float, float]:
    """``(lambda_min, lambda_max)`` of a symmetric PSD operator.

    The largest eigenvalue comes from plain power iteration; the smallest
    from power iteration on ``lambda_max I - A``.
    """
    top = power_iteration(apply, n, maxiter, tol)
    if strict and not top.converged:
        raise EigenEstimateError(
            f"lambda_max estimate did not converge in {maxiter} iterations "
            f"(estimate {top.value:.6g})",
            estimate=(None, top.value),
            iterations=top.iterations,
        )
    shift = top.value
    low = power_iteration(lambda v: shift * v - apply(v), n, maxiter, tol)
    lam_min = shift - low.value
    if strict and not low.converged:
        raise EigenEstimateError(
            f"lambda_min estimate did not converge in {maxiter} iterations "
            f"(estimates min {lam_min:.6g}, max {shift:.6g})",
            estimate=(lam_min, shift),
            iterations=low.iterations,
        )
    return lam_min, shift
