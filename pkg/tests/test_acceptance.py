"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION k: PASS|FAIL  detail`` line (visible
under ``pytest -v`` without ``-s``) and then asserts the same condition.
"""

import math
import time

import numpy as np
import pytest

from accjacobi.matrix_io import gen_random_spd, gen_sdd, laplacian_from_edges, laplacian_instance
from accjacobi.parallel_block import BlockWorkspace, load_imbalance, partition_rows
from accjacobi.proximal import Partition, build_j_block, build_j_diag, exact_spectral_norm
from accjacobi.solvers_accel import acc_jacobi_solve
from accjacobi.solvers_classic import (
    SolverConfig,
    Status,
    cg_solve,
    jacobi_solve,
    optimal_weight,
    pcg_diag_solve,
    weighted_jacobi_solve,
)
from accjacobi.sparse_core import SparseMatrixCsr

from conftest import laplacian_family, random_spsd, small_random_graph, spd_suite, theory_suite

THEORY_CFG = SolverConfig(tol=1e-300, maxiter=500)  # run all 500 steps


def announce(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def gap(A, x, x_star):
    e = x - x_star
    return 0.5 * e @ A @ e


def run_states(inst, J, restart):
    states = []
    rep = acc_jacobi_solve(
        inst.Q, inst.b, J, cfg=THEORY_CFG, restart=restart,
        callback=lambda s: states.append((s.t, s.x.copy(), s.x_prev.copy(), s.alpha)),
    )
    return rep, states


def oracle(inst):
    return np.linalg.solve(inst.Q.to_dense(), inst.b)


def test_criterion_1_sdd_ordering(capsys):
    inst = gen_sdd(1000)
    cfg = SolverConfig(tol=1e-4, maxiter=5000)
    t0 = time.perf_counter()
    jac = jacobi_solve(inst.Q, inst.b, cfg=cfg)
    omega = optimal_weight(inst.Q)
    wj = weighted_jacobi_solve(inst.Q, inst.b, omega=omega, cfg=cfg)
    acc = acc_jacobi_solve(inst.Q, inst.b, build_j_diag(inst.Q), cfg=cfg, restart=True, k0=2)
    elapsed = time.perf_counter() - t0
    checks = {
        "acc Converged": acc.status is Status.CONVERGED,
        "jacobi MaxIterReached": jac.status is Status.MAXITER,
        "wjacobi MaxIterReached": wj.status is Status.MAXITER,
        "acc strictly fewest iterations": acc.iterations < min(jac.iterations, wj.iterations),
        "runtime < 60 s": elapsed < 60,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (
        f"acc {acc.status}@{acc.iterations}, jacobi {jac.status}@{jac.iterations} "
        f"(res {jac.final_residual:.2e}), wjacobi(omega={omega:.6f}) {wj.status}@{wj.iterations}, "
        f"{elapsed:.1f}s" + (f"; failed: {', '.join(failed)}" if failed else "")
    )
    announce(capsys, 1, not failed, detail)
    assert not failed, detail


def test_criterion_2_rate_bound(capsys):
    t0 = time.perf_counter()
    worst = -np.inf
    for inst in theory_suite():
        A = inst.Q.to_dense()
        x_star = oracle(inst)
        J = build_j_diag(inst.Q)
        S = J.to_dense() - A
        f_star = 0.5 * x_star @ A @ x_star - inst.b @ x_star
        radius = x_star @ S @ x_star  # x^0 = 0
        _, states = run_states(inst, J, restart=False)
        assert [t for t, *_ in states] == list(range(1, 501))
        slack = 1e-10 * max(1.0, abs(f_star))
        for t, x, _, _ in states:
            worst = max(worst, (gap(A, x, x_star) - 2 * radius / (t + 1) ** 2) / slack)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 10
    announce(capsys, 2, ok, f"21 instances x 500 iterations, max excess/slack {worst:.3g}, {elapsed:.1f}s")
    assert ok


def test_criterion_3_lyapunov(capsys):
    t0 = time.perf_counter()
    worst = -np.inf
    for inst in theory_suite():
        A = inst.Q.to_dense()
        x_star = oracle(inst)
        J = build_j_diag(inst.Q)
        S = J.to_dense() - A
        _, states = run_states(inst, J, restart=False)
        energy = []
        for _, x, xp, a in states:
            w = a * x - (a - 1) * xp - x_star
            energy.append(a * a * gap(A, x, x_star) + 0.5 * w @ S @ w)
        worst = max(worst, float(np.max(np.diff(energy))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10
    announce(capsys, 3, ok, f"max energy increase {worst:.3g} (limit 1e-9 absolute), {elapsed:.1f}s")
    assert ok


def test_criterion_4_descent_and_restart_count(capsys):
    t0 = time.perf_counter()
    worst_descent = worst_anchor = -np.inf
    worst_count = -np.inf
    total_restarts = 0
    for inst in theory_suite():
        A = inst.Q.to_dense()
        x_star = oracle(inst)
        rep, states = run_states(inst, build_j_diag(inst.Q), restart=True)
        f0 = gap(A, np.zeros(inst.Q.n), x_star)
        worst_descent = max(worst_descent, max(gap(A, x, x_star) for _, x, _, _ in states) - f0)
        prev = {t: xp for t, _, xp, _ in states}
        anchors = [f0] + [gap(A, prev[t], x_star) for t in rep.restarts]
        if len(anchors) > 1:
            worst_anchor = max(worst_anchor, float(np.max(np.diff(anchors))))
        r = np.array(rep.restarts, dtype=int)
        total_restarts += len(r)
        for t in range(rep.iterations + 1):
            worst_count = max(worst_count, int(np.sum(r <= t)) - (math.log2(t + 2) - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_descent <= 1e-9 and worst_anchor <= 1e-9 and worst_count <= 0 and elapsed < 10
    announce(
        capsys, 4, ok,
        f"{total_restarts} restarts; max f(x^t)-f(x^0) {worst_descent:.3g}, max anchor rise {worst_anchor:.3g}, "
        f"max ell-(log2(t+2)-1) {worst_count:.3g}, {elapsed:.1f}s",
    )
    assert ok


def _psd_matrices():
    mats = [inst.Q for inst in spd_suite()]
    mats += [random_spsd(n, rank, seed=n + rank).Q for n, rank in [(8, 3), (16, 9), (32, 20), (64, 40)]]
    mats += [laplacian_from_edges(small_random_graph(4 + k % 9, 2 * k, seed=300 + k)) for k in range(10)]
    mats += [gen_sdd(n).Q for n in (2, 3, 8, 16, 32, 64)]
    return mats


def test_criterion_5_prox_psd(capsys):
    rng = np.random.default_rng(2024)
    diag_min = block_min = np.inf
    count = 0
    for Q in _psd_matrices():
        A = Q.to_dense()
        diag_min = min(diag_min, np.linalg.eigvalsh(build_j_diag(Q).to_dense() - A)[0])
        for s in range(1, min(4, Q.n) + 1):
            if s == 1 and np.linalg.eigvalsh(A)[0] <= 1e-12 * np.abs(A).max():
                continue  # with one block J = Q, which has no Cholesky factor when singular
            cuts = np.sort(rng.choice(np.arange(1, Q.n), size=s - 1, replace=False)) if s > 1 else []
            J = build_j_block(Q, Partition((0, *cuts, Q.n)), norm=exact_spectral_norm, safety=1.0)
            block_min = min(block_min, np.linalg.eigvalsh(J.to_dense() - A)[0])
            count += 1
    ok = diag_min >= -1e-10 and block_min >= -1e-8
    announce(capsys, 5, ok, f"{len(_psd_matrices())} matrices, {count} block partitions; "
             f"min eig diag {diag_min:.3g}, block {block_min:.3g}")
    assert ok


def test_criterion_6_oracle_equivalence(capsys):
    cfg = SolverConfig(tol=1e-6, maxiter=100000)
    worst = 0.0
    for k in range(20):
        inst = gen_random_spd((4, 8, 12, 16)[k % 4], seed=500 + k, cond=None if k % 2 == 0 else 10.0 ** (1 + k % 3))
        x_direct = oracle(inst)
        reps = [
            cg_solve(inst.Q, inst.b, cfg=cfg),
            pcg_diag_solve(inst.Q, inst.b, cfg=cfg),
            acc_jacobi_solve(inst.Q, inst.b, build_j_diag(inst.Q), cfg=cfg, restart=True),
        ]
        for rep in reps:
            assert rep.converged, (inst.label, rep.solver)
            worst = max(worst, np.linalg.norm(rep.x - x_direct) / np.linalg.norm(x_direct))
    ok = worst <= 1e-3
    announce(capsys, 6, ok, f"20 instances x (cg, pcg, accjacobi-restart), max relative error {worst:.3g}")
    assert ok


def test_criterion_7_partition_invariance(capsys):
    fam = laplacian_family()
    instances = [gen_sdd(200)] + [laplacian_instance(g, seed=7, label=name) for name, g in fam[:2]]
    mismatches = []
    for inst in instances:
        J = build_j_diag(inst.Q)
        ref = None
        for s in (1, 2, 4, 8):
            with BlockWorkspace(inst.Q, inst.b, J, partition_rows(inst.Q.n, s), workers=min(s, 4)) as ws:
                rep = acc_jacobi_solve(inst.Q, inst.b, J, workspace=ws)
            key = (rep.status, rep.iterations, rep.restarts)
            if ref is None:
                ref = (key, rep)
                continue
            same = (
                key == ref[0]
                and np.array_equal(rep.x, ref[1].x)
                and np.array_equal(rep.residuals(), ref[1].residuals())
                and np.array_equal(rep.objectives(), ref[1].objectives())
            )
            if not same:
                mismatches.append((inst.label, s))
    ok = not mismatches
    announce(capsys, 7, ok, f"{[i.label for i in instances]} x s in (1,2,4,8); mismatches {mismatches}")
    assert ok


def test_criterion_8_laplacians(capsys):
    cfg = SolverConfig(tol=1e-4, maxiter=5000)
    lines, ok = [], True
    for k, (name, g) in enumerate(laplacian_family()):
        inst = laplacian_instance(g, seed=40 + k, label=name)
        assert g.n <= 2000
        acc = acc_jacobi_solve(inst.Q, inst.b, build_j_diag(inst.Q), cfg=cfg, restart=True)
        cg = cg_solve(inst.Q, inst.b, cfg=cfg)
        pcg = pcg_diag_solve(inst.Q, inst.b, cfg=cfg)
        jac = jacobi_solve(inst.Q, inst.b, cfg=cfg)
        good = all(r.converged and r.final_residual <= 1e-4 for r in (acc, cg, pcg))
        good &= jac.status in (Status.DIVERGED, Status.MAXITER)
        ok &= good
        lines.append(f"{name}: acc {acc.iterations}, cg {cg.iterations}, pcg {pcg.iterations}, jacobi {jac.status}")
    announce(capsys, 8, ok, "; ".join(lines))
    assert ok


def test_criterion_9_load_imbalance(capsys):
    A = np.zeros((4, 4))
    A[0, :] = 1
    A[1, :2] = 1
    A[2, 0] = A[3, 0] = 1
    Q = SparseMatrixCsr.from_dense(A)
    got = {
        "rows nnz (4,2,1,1), s=2": (load_imbalance(Q, partition_rows(4, 2)), 1.5),
        "same, s=1": (load_imbalance(Q, partition_rows(4, 1)), 1.0),
        "identity 6, s=3": (load_imbalance(SparseMatrixCsr.from_dense(np.eye(6)), partition_rows(6, 3)), 1.0),
        "gen_sdd(12), s=4": (load_imbalance(gen_sdd(12).Q, partition_rows(12, 4)), 1.0),
    }
    ok = all(v == pytest.approx(w, rel=1e-15) for v, w in got.values())
    announce(capsys, 9, ok, ", ".join(f"{k} -> {v:g}" for k, (v, _) in got.items()))
    assert ok


def test_criterion_10_weighted_jacobi(capsys):
    instances = theory_suite() + [gen_sdd(n) for n in (3, 4, 64)]
    instances += [laplacian_instance(g, seed=1, label=name) for name, g in laplacian_family()]
    not_bitwise = []
    cfg = SolverConfig(tol=1e-4, maxiter=5000)
    for inst in instances:
        a = jacobi_solve(inst.Q, inst.b, cfg=cfg)
        b = weighted_jacobi_solve(inst.Q, inst.b, omega=1.0, cfg=cfg)
        if not (a.status == b.status and np.array_equal(a.x, b.x) and np.array_equal(a.residuals(), b.residuals())
                and np.array_equal(a.objectives(), b.objectives())):
            not_bitwise.append(inst.label)
    worst = 0.0
    for inst in [i for i in instances if i.Q.n <= 64]:
        A = inst.Q.to_dense()
        s = 1 / np.sqrt(np.diag(A))
        ev = np.linalg.eigvalsh(s[:, None] * A * s[None, :])
        want = 2 / (ev[0] + ev[-1])
        worst = max(worst, abs(optimal_weight(inst.Q) - want) / want)
    ok = not not_bitwise and worst <= 1e-6
    announce(capsys, 10, ok, f"omega=1 non-bitwise on {not_bitwise}; {len(instances)} instances; "
             f"omega_opt max relative error {worst:.3g}")
    assert ok
