"""Benchmark harness: load or generate an instance, run solvers, write traces.

Outputs in ``BenchSpec.out``:

``<label>__<solver>.csv``
    one row per iteration, columns ``iter,rel_residual,objective,restart_flag``
    (``objective`` is ``0.5 <x, Qx> - <b, x>``; ``restart_flag`` is 1 on
    iterations where the accelerated solver restarted, else 0).
``summary.jsonl``
    one JSON object per solver: solver, status, iterations, final_residual,
    wall_time, restarts, instance metadata, load imbalance and the results of
    any requested verification.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import matrix_io
from .matrix_io import ProblemInstance
from .parallel_block import BlockWorkspace, load_imbalance, partition_rows
from .proximal import ProxMatrix, build_j_block, build_j_diag, check_s_psd
from .solvers_accel import acc_jacobi_solve
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
from .sparse_core import SparseMatrixCsr, objective, s_inner

log = logging.getLogger(__name__)

CSV_COLUMNS = ("iter", "rel_residual", "objective", "restart_flag")
DENSE_SOLVE_MAX_N = 64
BOUND_SLACK = 1e-10
DESCENT_SLACK = 1e-9
S_PSD_SLACK = 1e-8

SDD_SOLVERS = ("jacobi", "wjacobi:opt", "accjacobi")
GENERAL_SOLVERS = ("cg", "pcg", "accjacobi")


class VerificationError(ValueError):
    pass


@dataclass
class BenchSpec:
    matrix: str | None = None
    graph: str | None = None
    gen: str | None = None
    rhs: str | None = None
    solvers: list[str] = field(default_factory=list)
    tol: float = 1e-4
    maxiter: int = 5000
    j: str = "diag"
    partitions: int = 1
    restart: bool = True
    k0: int = 2
    out: str = "bench_out"
    seed: int = 0
    workers: int = 1
    verify_s: bool = False
    verify_bounds: bool = False

    def __post_init__(self):
        sources = [s for s in (self.matrix, self.graph, self.gen) if s is not None]
        if len(sources) != 1:
            raise ValueError("exactly one of matrix, graph or gen must be given")
        if self.j not in ("diag", "block"):
            raise ValueError(f"j must be 'diag' or 'block', got {self.j!r}")
        if self.k0 < 2:
            raise ValueError(f"k0 must be >= 2, got {self.k0}")
        if self.partitions < 1:
            raise ValueError(f"partitions must be >= 1, got {self.partitions}")

    def default_solvers(self) -> list[str]:
        return list(SDD_SOLVERS if self.gen is not None else GENERAL_SOLVERS)


@dataclass
class VerificationReport:
    kind: str
    passed: bool
    max_violation: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def load_instance(spec: BenchSpec) -> ProblemInstance:
    """Instance from the spec's source; ``rhs`` overrides the source's default ``b``.

    Defaults: the sdd generator keeps its all-ones ``b``; graphs and matrix
    files get a consistent ``b = Q xbar`` seeded by ``spec.seed``.
    """
    if spec.gen is not None:
        name, _, arg = spec.gen.partition(":")
        if name != "sdd" or not arg:
            raise ValueError(f"unknown generator {spec.gen!r}; expected sdd:<n>")
        inst = matrix_io.gen_sdd(int(arg))
        rhs = spec.rhs
    elif spec.graph is not None:
        inst = matrix_io.laplacian_instance(matrix_io.read_edge_list(spec.graph), spec.seed, Path(spec.graph).stem)
        rhs = spec.rhs
    else:
        Q = matrix_io.read_matrix_market(spec.matrix)
        inst = ProblemInstance(Q, np.ones(Q.n), None, label=Path(spec.matrix).stem)
        rhs = spec.rhs or f"consistent:{spec.seed}"

    if rhs is None:
        return inst
    kind, _, arg = rhs.partition(":")
    if kind == "ones":
        known = inst.x_star if spec.gen is not None else None
        return ProblemInstance(inst.Q, np.ones(inst.Q.n), known, inst.label, inst.warnings)
    if kind == "consistent":
        fresh = matrix_io.gen_consistent_rhs(inst.Q, int(arg) if arg else spec.seed)
        return ProblemInstance(inst.Q, fresh.b, fresh.x_star, inst.label, inst.warnings)
    raise ValueError(f"unknown rhs {rhs!r}; expected ones or consistent:<seed>")


def build_prox(Q: SparseMatrixCsr, kind: str, partitions: int) -> ProxMatrix:
    if kind == "diag":
        return build_j_diag(Q)
    return build_j_block(Q, partition_rows(Q.n, partitions))


def reference_solution(inst: ProblemInstance) -> np.ndarray:
    """Known solution: dense direct solve for small SPD systems, else the generator's."""
    if inst.Q.n <= DENSE_SOLVE_MAX_N:
        A = inst.Q.to_dense()
        if np.linalg.eigvalsh(A)[0] > 0:
            return np.linalg.solve(A, inst.b)
    if inst.x_star is not None:
        return inst.x_star
    raise VerificationError(
        f"no known solution for {inst.label!r} (n={inst.Q.n}); bound verification needs a "
        f"generated instance or a small SPD system (n <= {DENSE_SOLVE_MAX_N})"
    )


def verify_bounds(report: SolveReport, inst: ProblemInstance, J: ProxMatrix, x0=None) -> VerificationReport:
    """Check an accelerated-Jacobi trace against its theoretical guarantee.

    Without restarts: ``f(x^t) - f* <= 2 ||x^0 - x*||_S^2 / (t+1)^2`` for all
    ``t >= 1`` (and ``f(x^t) >= f*``), slack ``1e-10 max(1, |f*|)``.
    With restarts: ``f(x^t) <= f(x^0)`` for all ``t`` and the objective at
    restart anchors is nonincreasing, slack ``1e-9 max(1, |f(x^0)|)``.
    """
    if not report.solver.startswith("accjacobi"):
        raise VerificationError(f"bounds apply to the accelerated Jacobi method only, not {report.solver!r}")
    obj = report.objectives()
    if len(obj) == 0 or np.any(np.isnan(obj)):
        raise VerificationError("trace has no recorded objective values")
    Q, b = inst.Q, inst.b

    if report.solver == "accjacobi-restart":
        f0 = obj[0]
        slack = DESCENT_SLACK * max(1.0, abs(f0))
        worst = float(np.max(obj - f0))
        anchors = [f0] + [obj[t - 1] for t in report.restarts]
        anchor_worst = float(np.max(np.diff(anchors))) if len(anchors) > 1 else -np.inf
        violation = max(worst, anchor_worst)
        return VerificationReport(
            "descent",
            violation <= slack,
            violation,
            slack,
            f"{len(report.restarts)} restarts",
        )

    x_star = reference_solution(inst)
    x0 = np.zeros(Q.n) if x0 is None else np.asarray(x0, dtype=np.float64)
    f_star = objective(Q, b, x_star)
    e0 = x0 - x_star
    radius = s_inner(J, Q, e0, e0)
    t = np.arange(len(obj))[1:]
    gap = obj[1:] - f_star
    excess = gap - 2.0 * radius / (t + 1.0) ** 2
    violation = float(max(np.max(excess), np.max(-gap))) if len(t) else -np.inf
    slack = BOUND_SLACK * max(1.0, abs(f_star))
    return VerificationReport(
        "rate-bound", violation <= slack, violation, slack, f"f*={f_star:.17g}, ||x0-x*||_S^2={radius:.6g}"
    )


def run_solver(name: str, inst: ProblemInstance, spec: BenchSpec, J_cache: dict) -> SolveReport:
    Q, b = inst.Q, inst.b
    cfg = SolverConfig(tol=spec.tol, maxiter=spec.maxiter)
    base, _, arg = name.partition(":")
    if base == "jacobi":
        return jacobi_solve(Q, b, cfg=cfg)
    if base in ("wjacobi", "wjacobi-opt"):
        if base == "wjacobi-opt" or arg in ("", "opt"):
            omega = optimal_weight(Q)
        else:
            omega = float(arg)
        rep = weighted_jacobi_solve(Q, b, omega=omega, cfg=cfg)
        rep.solver = f"wjacobi:{omega:.6g}"
        return rep
    if base == "cg":
        return cg_solve(Q, b, cfg=cfg)
    if base == "pcg":
        return pcg_diag_solve(Q, b, cfg=cfg)
    if base in ("accjacobi", "accjacobi-restart"):
        restart = spec.restart or base == "accjacobi-restart"
        if "J" not in J_cache:
            J_cache["J"] = build_prox(Q, spec.j, spec.partitions)
        J = J_cache["J"]
        if spec.partitions > 1:
            with BlockWorkspace(Q, b, J, partition_rows(Q.n, spec.partitions), spec.workers) as ws:
                return acc_jacobi_solve(Q, b, J, cfg=cfg, restart=restart, k0=spec.k0, workspace=ws)
        return acc_jacobi_solve(Q, b, J, cfg=cfg, restart=restart, k0=spec.k0)
    raise ValueError(f"unknown solver {name!r}")


def write_trace(report: SolveReport, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in report.trace:
            w.writerow([row.iter, repr(row.rel_residual), "" if row.objective is None else repr(row.objective),
                        int(row.restart)])


def read_trace(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [
            {
                "iter": int(r["iter"]),
                "rel_residual": float(r["rel_residual"]),
                "objective": float(r["objective"]) if r["objective"] else None,
                "restart_flag": int(r["restart_flag"]),
            }
            for r in csv.DictReader(fh)
        ]


def run_benchmark(spec: BenchSpec) -> tuple[list[dict], bool]:
    """Run every requested solver; return the summary records and overall success.

    Success means every solver ended Converged and every requested
    verification passed.  A solver that raises is recorded with status
    ``Error`` and the run continues.
    """
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    inst = load_instance(spec)
    Q = inst.Q
    solvers = spec.solvers or spec.default_solvers()
    for w in inst.warnings:
        log.warning("%s: %s", inst.label, w)

    common = {
        "instance": inst.label,
        "n": Q.n,
        "nnz": Q.nnz,
        "partitions": spec.partitions,
        "load_imbalance": load_imbalance(Q, partition_rows(Q.n, min(spec.partitions, Q.n))),
        "load_imbalance_64": load_imbalance(Q, partition_rows(Q.n, 64)) if Q.n >= 64 else None,
    }
    J_cache: dict = {}
    records, ok = [], True
    for name in solvers:
        rec = {"solver": name, **common}
        t0 = time.perf_counter()
        try:
            report = run_solver(name, inst, spec, J_cache)
        except Exception as exc:  # recorded, remaining solvers still run
            log.error("%s failed: %s", name, exc)
            rec.update(status="Error", error=f"{type(exc).__name__}: {exc}", wall_time=time.perf_counter() - t0)
            records.append(rec)
            ok = False
            continue
        rec.update(
            solver=report.solver or name,
            status=str(report.status),
            iterations=report.iterations,
            final_residual=report.final_residual,
            wall_time=time.perf_counter() - t0,
            restarts=len(report.restarts),
        )
        ok &= report.status is Status.CONVERGED
        write_trace(report, out / f"{inst.label}__{name.replace(':', '-')}.csv")

        if report.solver.startswith("accjacobi"):
            J = J_cache["J"]
            if spec.verify_s:
                lam = check_s_psd(Q, J)
                floor = -S_PSD_SLACK * max(1.0, float(np.max(np.abs(J.apply(np.ones(Q.n))))))
                rec["verify_s"] = {"lambda_min": lam, "passed": lam >= floor, "tolerance": floor}
                ok &= lam >= floor
            if spec.verify_bounds:
                try:
                    v = verify_bounds(report, inst, J)
                    rec["verify_bounds"] = v.as_dict()
                    ok &= v.passed
                except VerificationError as exc:
                    rec["verify_bounds"] = {"passed": False, "error": str(exc)}
                    ok = False
        records.append(rec)

    with (out / "summary.jsonl").open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, default=_json_default) + "\n")
    return records, ok


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def format_summary(rec: dict) -> str:
    if rec["status"] == "Error":
        return f"{rec['solver']:<20} Error  {rec['error']}"
    line = (
        f"{rec['solver']:<20} {rec['status']:<15} iters={rec['iterations']:<6d} "
        f"res={rec['final_residual']:.3e} time={rec['wall_time']:.2f}s"
    )
    if rec.get("restarts"):
        line += f" restarts={rec['restarts']}"
    for key in ("verify_s", "verify_bounds"):
        if key in rec:
            line += f" {key}={'pass' if rec[key]['passed'] else 'FAIL'}"
    return line
