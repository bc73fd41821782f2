"""Problem ingestion and generation.

Random draws use numpy's ``Philox`` counter-based bit generator seeded with
the integer seed given by the caller, so generated right-hand sides and
graphs are reproducible across platforms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sparse_core import SparseMatrixCsr, matvec


class MatrixMarketError(ValueError):
    pass


class IsolatedNodeWarning(UserWarning):
    pass


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class EdgeList:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            seen.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass
class ProblemInstance:
    Q: SparseMatrixCsr
    b: np.ndarray
    x_star: np.ndarray | None = None
    label: str = ""
    warnings: list[str] = field(default_factory=list)


# --- Matrix Market -----------------------------------------------------------

def read_matrix_market(path) -> SparseMatrixCsr:
    """Read a ``matrix coordinate real {symmetric|general}`` file.

    Symmetric files store one triangle, which is mirrored.  General files are
    accepted only when the assembled matrix is exactly symmetric.
    """
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError(f"{path}: empty file")

    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise MatrixMarketError(f"{path}:1: missing %%MatrixMarket header")
    obj, fmt, fld, symm = (h.lower() for h in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"{path}:1: only 'matrix coordinate' is supported, got '{obj} {fmt}'")
    if fld != "real":
        raise MatrixMarketError(f"{path}:1: unsupported field '{fld}' (only 'real')")
    if symm not in ("symmetric", "general"):
        raise MatrixMarketError(f"{path}:1: unsupported symmetry '{symm}'")

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if s and not s.startswith("%"):
            size = s.split()
            break
    if size is None:
        raise MatrixMarketError(f"{path}: missing size line")
    try:
        nrows, ncols, nnz = (int(tok) for tok in size)
    except ValueError:
        raise MatrixMarketError(f"{path}:{lineno}: malformed size line '{lines[lineno - 1]}'") from None
    if nrows != ncols:
        raise MatrixMarketError(f"{path}:{lineno}: matrix is {nrows}x{ncols}, not square")

    rows, cols, vals = [], [], []
    for k in range(lineno + 1, len(lines) + 1):
        s = lines[k - 1].strip()
        if not s or s.startswith("%"):
            continue
        tok = s.split()
        try:
            if len(tok) != 3:
                raise ValueError
            i, j, v = int(tok[0]) - 1, int(tok[1]) - 1, float(tok[2])
        except ValueError:
            raise MatrixMarketError(f"{path}:{k}: cannot parse entry '{s}'") from None
        if not (0 <= i < nrows and 0 <= j < ncols):
            raise MatrixMarketError(f"{path}:{k}: index ({i + 1}, {j + 1}) out of range")
        if symm == "symmetric" and i < j:
            raise MatrixMarketError(f"{path}:{k}: upper-triangle entry in a symmetric file")
        rows.append(i)
        cols.append(j)
        vals.append(v)
    if len(rows) != nnz:
        raise MatrixMarketError(f"{path}: header declares {nnz} entries, found {len(rows)}")

    rows = np.array(rows, dtype=np.int64)
    cols = np.array(cols, dtype=np.int64)
    vals = np.array(vals, dtype=np.float64)
    if symm == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    A = SparseMatrixCsr.from_coo(nrows, rows, cols, vals)
    if symm == "general" and not A.is_symmetric():
        raise MatrixMarketError(f"{path}: 'general' matrix is not symmetric")
    return A


def write_matrix_market(A: SparseMatrixCsr, path, symmetric: bool = True) -> None:
    """Write ``A``; with ``symmetric`` only the lower triangle is stored."""
    rows = np.repeat(np.arange(A.n), A.row_nnz())
    cols, vals = A.col_idx, A.values
    if symmetric:
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    kind = "symmetric" if symmetric else "general"
    with Path(path).open("w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
        fh.write(f"{A.n} {A.n} {len(vals)}\n")
        for i, j, v in zip(rows, cols, vals):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


# --- graphs ------------------------------------------------------------------

def read_edge_list(path) -> EdgeList:
    """First data line ``n m``, then ``m`` lines ``i j`` (0-based); ``#`` lines ignored."""
    path = Path(path)
    data = []
    for k, line in enumerate(path.read_text().splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            i, j = (int(t) for t in s.split())
        except ValueError:
            raise ValueError(f"{path}:{k}: expected two integers, got '{s}'") from None
        data.append((k, i, j))
    if not data:
        raise ValueError(f"{path}: empty edge list")
    _, n, m = data[0]
    if len(data) - 1 != m:
        raise ValueError(f"{path}: header declares {m} edges, found {len(data) - 1}")
    return EdgeList(n, tuple((i, j) for _, i, j in data[1:]))


def write_edge_list(g: EdgeList, path) -> None:
    with Path(path).open("w") as fh:
        fh.write(f"{g.n} {len(g.edges)}\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def laplacian_from_edges(g: EdgeList) -> SparseMatrixCsr:
    """Graph Laplacian: degree on the diagonal, -1 per edge.

    Emits :class:`IsolatedNodeWarning` when some node has degree zero, since
    the zero diagonal entry makes Jacobi-type updates undefined.
    """
    e = np.array(g.edges, dtype=np.int64).reshape(-1, 2)
    deg = g.degrees()
    diag = np.arange(g.n)
    rows = np.concatenate([e[:, 0], e[:, 1], diag])
    cols = np.concatenate([e[:, 1], e[:, 0], diag])
    vals = np.concatenate([-np.ones(2 * len(e)), deg.astype(np.float64)])
    isolated = np.flatnonzero(deg == 0)
    if len(isolated):
        warnings.warn(
            f"{len(isolated)} isolated node(s), first {isolated[0]}: zero diagonal entry",
            IsolatedNodeWarning,
            stacklevel=2,
        )
    return SparseMatrixCsr.from_coo(g.n, rows, cols, vals)


def laplacian_instance(g: EdgeList, seed: int, label: str = "laplacian") -> ProblemInstance:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IsolatedNodeWarning)
        L = laplacian_from_edges(g)
    inst = gen_consistent_rhs(L, seed)
    inst.label = label
    inst.warnings = [str(w.message) for w in caught]
    return inst


def random_tree(n: int, seed: int) -> EdgeList:
    """Uniform random recursive tree: node k attaches to a uniform earlier node."""
    rng = rng_from_seed(seed)
    parents = [int(rng.integers(0, k)) for k in range(1, n)]
    return EdgeList(n, tuple((k, p) for k, p in enumerate(parents, start=1)))


def preferential_tree(n: int, seed: int) -> EdgeList:
    """Barabasi-Albert tree (one edge per new node), heavy-tailed degrees."""
    rng = rng_from_seed(seed)
    ends = [0]
    edges = []
    for k in range(1, n):
        t = ends[int(rng.integers(0, len(ends)))]
        edges.append((k, t))
        ends += [k, t]
    return EdgeList(n, tuple(edges))


def random_bipartite(n_left: int, n_right: int, extra: int, seed: int) -> EdgeList:
    """Connected bipartite graph: random spanning tree across the sides plus ``extra`` cross edges."""
    if n_left < 1 or n_right < 1:
        raise ValueError("both sides need at least one node")
    rng = rng_from_seed(seed)
    n = n_left + n_right
    edges = [(0, n_left)]
    seen = ([0], [n_left])
    rest = [int(v) for v in rng.permutation(np.r_[1:n_left, n_left + 1 : n])]
    for v in rest:
        side = int(v >= n_left)
        other = seen[1 - side]
        edges.append((v, other[int(rng.integers(0, len(other)))]))
        seen[side].append(v)
    for _ in range(extra):
        edges.append((int(rng.integers(0, n_left)), int(rng.integers(n_left, n))))
    return EdgeList(n, tuple(edges))


def grid_graph(rows: int, cols: int, drop: float, seed: int) -> EdgeList:
    """2-D grid with a fraction ``drop`` of non-tree edges removed; stays connected."""
    rng = rng_from_seed(seed)
    idx = lambda r, c: r * cols + c  # noqa: E731
    # spanning comb: full first column plus every row
    tree = [(idx(r, c), idx(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    tree += [(idx(r, 0), idx(r + 1, 0)) for r in range(rows - 1)]
    rest = [(idx(r, c), idx(r + 1, c)) for r in range(rows - 1) for c in range(1, cols)]
    keep = rng.random(len(rest)) >= drop
    return EdgeList(rows * cols, tuple(tree + [e for e, k in zip(rest, keep) if k]))


# --- synthetic systems -------------------------------------------------------

def gen_sdd(n: int) -> ProblemInstance:
    """``n`` on the diagonal, -1 elsewhere, ``b`` all ones; the solution is all ones."""
    if n < 2:
        raise ValueError(f"gen_sdd needs n >= 2, got {n}")
    row_ptr = np.arange(n + 1, dtype=np.int64) * n
    col_idx = np.tile(np.arange(n, dtype=np.int64), n)
    values = -np.ones(n * n)
    values[np.arange(n) * (n + 1)] = float(n)
    Q = SparseMatrixCsr(n, row_ptr, col_idx, values)
    return ProblemInstance(Q, np.ones(n), np.ones(n), label=f"sdd-{n}")


def gen_consistent_rhs(Q: SparseMatrixCsr, seed: int) -> ProblemInstance:
    """Draw ``xbar ~ U[-1, 1]^n`` and set ``b = Q xbar`` so ``b`` lies in range(Q)."""
    xbar = rng_from_seed(seed).uniform(-1.0, 1.0, Q.n)
    return ProblemInstance(Q, matvec(Q, xbar), xbar, label=f"consistent-{seed}")


def gen_random_spd(n: int, seed: int, cond: float | None = None) -> ProblemInstance:
    """Dense random SPD matrix with a consistent right-hand side.

    With ``cond`` the spectrum is log-spaced between 1 and ``cond`` in a random
    orthogonal basis; otherwise ``G G^T / n + 0.1 I`` for Gaussian ``G``.
    """
    rng = rng_from_seed(seed)
    if cond is None:
        G = rng.standard_normal((n, n))
        A = G @ G.T / n + 0.1 * np.eye(n)
    else:
        U, _ = np.linalg.qr(rng.standard_normal((n, n)))
        A = (U * np.logspace(0, np.log10(cond), n)) @ U.T
    A = 0.5 * (A + A.T)
    Q = SparseMatrixCsr.from_dense(A)
    inst = gen_consistent_rhs(Q, seed + 1)
    inst.label = f"spd-{n}-{seed}"
    return inst
