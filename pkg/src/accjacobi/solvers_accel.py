"""Nesterov-accelerated Jacobi-type iteration with adaptive restarting.

Each iteration takes the proximal step ``x^t = y^t + J^{-1}(b - Q y^t)`` and
then either extrapolates

    y^{t+1} = x^t + ((alpha_t - 1) / alpha_{t+1}) (x^t - x^{t-1})

or, when restarting is enabled, the prohibition period ``K_l`` has elapsed
since the last restart and ``<Q y^t - b, x^t - x^{t-1}> >= 0``, discards
``x^t`` and restarts the momentum from ``x^{t-1}``.  ``K_l`` doubles after
each restart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .proximal import ProxMatrix
from .solvers_classic import SolveReport, SolverConfig, Status, _Recorder, _setup
from .sparse_core import DimensionError, SparseMatrixCsr, matvec


@dataclass
class AccelState:
    """Loop state at iteration ``t``.

    ``alpha`` is alpha_t and ``alpha_next`` alpha_{t+1}.  ``ell`` counts
    restarts, ``K_ell`` is the current prohibition length and ``K_re`` the
    iteration of the last restart.
    """

    t: int
    x: np.ndarray
    x_prev: np.ndarray
    y: np.ndarray
    alpha: float
    alpha_next: float
    restart_enabled: bool
    ell: int
    K_ell: int
    K_re: int


def alpha_next(alpha: float) -> float:
    return (1.0 + math.sqrt(1.0 + 4.0 * alpha * alpha)) / 2.0


def extrapolate(x: np.ndarray, x_prev: np.ndarray, alpha: float, alpha_next: float) -> np.ndarray:
    return x + ((alpha - 1.0) / alpha_next) * (x - x_prev)


def _step(Q: SparseMatrixCsr, b: np.ndarray, J: ProxMatrix, y: np.ndarray):
    r = b - matvec(Q, y)
    return y + J.solve(r), r


def accel_step(Q: SparseMatrixCsr, b, J: ProxMatrix, y) -> np.ndarray:
    """``y + J^{-1}(b - Q y)``, the minimizer of ``f(x) + 0.5 ||x - y||_{J-Q}^2``."""
    if J.n != Q.n:
        raise DimensionError(f"J is {J.n}x{J.n} but Q is {Q.n}x{Q.n}")
    return _step(Q, np.asarray(b, dtype=np.float64), J, np.asarray(y, dtype=np.float64))[0]


def _should_restart(grad_y, x, x_prev, t, K_re, K_ell) -> bool:
    return t > K_re + K_ell and float(np.dot(grad_y, x - x_prev)) >= 0.0


def restart_check(Q, b, y, x, x_prev, t: int, K_re: int, K_ell: int) -> bool:
    """Prohibition period elapsed and ``<Qy - b, x - x_prev> >= 0``."""
    if t <= K_re + K_ell:
        return False
    return _should_restart(matvec(Q, y) - b, x, x_prev, t, K_re, K_ell)


def apply_restart(state: AccelState) -> AccelState:
    """Reset momentum at ``state.t``; the freshly computed ``state.x`` is dropped."""
    return replace(
        state,
        K_re=state.t,
        K_ell=2 * state.K_ell,
        ell=state.ell + 1,
        alpha=0.0,
        alpha_next=1.0,
        y=state.x_prev,
        x=state.x_prev,
    )


def acc_jacobi_solve(
    Q: SparseMatrixCsr,
    b,
    J: ProxMatrix,
    x0=None,
    cfg: SolverConfig | None = None,
    *,
    restart: bool = True,
    k0: int = 2,
    workspace=None,
    callback: Callable[[AccelState], None] | None = None,
) -> SolveReport:
    """Accelerated Jacobi-type solve.

    ``workspace`` (a :class:`~accjacobi.parallel_block.BlockWorkspace`)
    switches the proximal step to the row-block kernel.  ``callback`` sees
    the state right after each proximal step, before any restart, with
    ``state.x`` the new iterate, ``state.x_prev`` the previous one and
    ``state.alpha`` the alpha_t paired with them.
    """
    if k0 < 2:
        raise ValueError(f"k0 must be >= 2, got {k0}")
    if J.n != Q.n:
        raise DimensionError(f"J is {J.n}x{J.n} but Q is {Q.n}x{Q.n}")
    b, x0, cfg = _setup(Q, b, x0, cfg)
    if workspace is None:
        step = lambda y: _step(Q, b, J, y)  # noqa: E731
    else:
        step = workspace.step
    name = "accjacobi-restart" if restart else "accjacobi"

    rec = _Recorder(b, cfg)
    qx = matvec(Q, x0)
    status = rec.record(0, x0, b - qx, qx)
    if status is not None:
        return rec.report(status, 0, x0, name)

    state = AccelState(
        t=0, x=x0, x_prev=x0, y=x0, alpha=1.0, alpha_next=alpha_next(1.0),
        restart_enabled=restart, ell=0, K_ell=k0, K_re=0,
    )
    restarts: list[int] = []
    t = 0
    while True:
        t += 1
        x_new, r_y = step(state.y)
        state.t, state.x_prev, state.x = t, state.x, x_new
        if callback is not None:
            callback(state)

        qx = matvec(Q, x_new)
        status = rec.record(t, x_new, b - qx, qx)
        if status is not None:
            return rec.report(status, t, x_new, name, restarts)

        # r_y = b - Qy, so the gradient at y is its exact negation
        if restart and _should_restart(-r_y, x_new, state.x_prev, t, state.K_re, state.K_ell):
            state = apply_restart(state)
            restarts.append(t)
            rec.mark_restart()
        else:
            state.alpha_next = alpha_next(state.alpha)
            state.y = extrapolate(x_new, state.x_prev, state.alpha, state.alpha_next)
        state.alpha = state.alpha_next
