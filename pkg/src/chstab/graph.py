"""Weighted graph Laplacians and their resolvent ``(I - k L)^{-1}``.

An operator acts as ``(L u)_i = -w_ii u_i + sum_{j != i} w_ij u_j`` with
``w_ij >= 0`` and ``w_ii >= sum_{j != i} w_ij``.  Under that dominance the
resolvent equation is equivalent to the fixed point

    u_i = sum_{j != i} k w_ij / (1 + k w_ii) u_j + f_i / (1 + k w_ii),

a contraction in the max norm with factor ``theta = max_i k w_ii / (1 + k w_ii)``,
so the solution never exceeds the data in max norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

_EPS = np.finfo(np.float64).eps


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class GraphLaplacianOp:
    offdiag: sp.csr_matrix
    diag: np.ndarray
    conservative: bool

    @classmethod
    def from_weights(cls, offdiag, diag=None, *, rtol: float = 1e-12) -> "GraphLaplacianOp":
        """Build from off-diagonal weights; ``diag=None`` means conservative rows."""
        W = sp.csr_matrix(offdiag, dtype=np.float64)
        W.setdiag(0.0)
        W.eliminate_zeros()
        W.sum_duplicates()
        n = W.shape[0]
        if W.shape != (n, n):
            raise ValueError(f"weight matrix must be square, got {W.shape}")
        if W.nnz and W.data.min() < 0:
            raise ValueError("off-diagonal weights must be nonnegative")
        rowsum = np.asarray(W.sum(axis=1)).ravel()
        if diag is None:
            diag = rowsum.copy()
        diag = np.asarray(diag, dtype=np.float64).reshape(n)
        slack = diag - rowsum
        tol = rtol * np.maximum(diag, rowsum)
        if np.any(slack < -tol):
            i = int(np.argmin(slack))
            raise ValueError(f"diagonal dominance violated at row {i}: w_ii={diag[i]!r} < {rowsum[i]!r}")
        conservative = bool(np.all(np.abs(slack) <= tol))
        diag.flags.writeable = False
        return cls(W, diag, conservative)

    @property
    def vertex_count(self) -> int:
        return self.diag.shape[0]

    def apply(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        flat = u.reshape(self.vertex_count)
        return (self.offdiag @ flat - self.diag * flat).reshape(u.shape)

    __call__ = apply

    def dense(self) -> np.ndarray:
        return self.offdiag.toarray() - np.diag(self.diag)

    def is_symmetric(self, rtol: float = 1e-14) -> bool:
        diff = abs(self.offdiag - self.offdiag.T)
        return diff.nnz == 0 or diff.max() <= rtol * abs(self.offdiag).max()

    def is_connected(self) -> bool:
        n_comp, _ = connected_components(self.offdiag, directed=False)
        return n_comp == 1


def central_difference_1d(N: int, dx: float, bc: str = "periodic") -> GraphLaplacianOp:
    """Three-point Laplacian on ``N`` vertices.

    ``bc="dirichlet"`` uses zero ghost values ``u_{-1} = u_N = 0``: boundary rows
    keep ``w_ii = 2/dx^2`` but only one neighbour, so the operator is not
    conservative.  For periodic ``N = 2`` both neighbours coincide and their
    weights add.
    """
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    if bc not in ("periodic", "dirichlet"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    N = int(N)
    w = 1.0 / dx**2
    i = np.arange(N)
    if bc == "periodic":
        rows = np.concatenate([i, i])
        cols = np.concatenate([(i + 1) % N, (i - 1) % N])
    else:
        rows = np.concatenate([i[:-1], i[1:]])
        cols = np.concatenate([i[1:], i[:-1]])
    W = sp.coo_matrix((np.full(rows.size, w), (rows, cols)), shape=(N, N)).tocsr()
    return GraphLaplacianOp.from_weights(W, np.full(N, 2.0 * w))


def five_point_2d(N: int, h: float) -> GraphLaplacianOp:
    """Periodic five-point stencil on an ``N x N`` grid, row-major vertex order."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    N = int(N)
    w = 1.0 / h**2
    idx = np.arange(N * N).reshape(N, N)
    rows, cols = [], []
    for shift, axis in ((1, 0), (-1, 0), (1, 1), (-1, 1)):
        rows.append(idx.ravel())
        cols.append(np.roll(idx, shift, axis=axis).ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    W = sp.coo_matrix((np.full(rows.size, w), (rows, cols)), shape=(N * N, N * N)).tocsr()
    return GraphLaplacianOp.from_weights(W, np.full(N * N, 4.0 * w))


def random_conservative_graph(n: int, rng: np.random.Generator, density: float = 0.5,
                              wmax: float = 1.0) -> GraphLaplacianOp:
    """Random symmetric connected weighted graph (a random spanning path plus extra edges)."""
    perm = rng.permutation(n)
    W = np.zeros((n, n))
    for a, b in zip(perm[:-1], perm[1:]):
        W[min(a, b), max(a, b)] = rng.uniform(0.1, 1.0) * wmax
    extra = np.triu(rng.uniform(size=(n, n)) < density, 1)
    W[extra] = np.maximum(W[extra], rng.uniform(0.0, wmax, size=int(extra.sum())))
    W = np.triu(W, 1)
    W = W + W.T
    return GraphLaplacianOp.from_weights(W)


def apply_biharmonic(op: GraphLaplacianOp, u) -> np.ndarray:
    return op.apply(op.apply(u))


@dataclass(frozen=True, eq=False)
class ResolventProblem:
    """The equation ``u - k L u = f`` for a fixed operator and ``k > 0``."""

    operator: GraphLaplacianOp
    k: float

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValueError(f"k must be positive and finite, got {self.k}")

    @property
    def theta(self) -> float:
        kw = self.k * self.operator.diag
        return float(np.max(kw / (1.0 + kw))) if kw.size else 0.0

    def contraction(self, u, f) -> np.ndarray:
        """One application of the fixed-point map ``T``."""
        op = self.operator
        u = np.asarray(u, dtype=np.float64).reshape(op.vertex_count)
        f = np.asarray(f, dtype=np.float64).reshape(op.vertex_count)
        return (self.k * (op.offdiag @ u) + f) / (1.0 + self.k * op.diag)

    def residual(self, u, f) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        return u - self.k * self.operator.apply(u) - np.asarray(f).reshape(u.shape)


def resolvent_solve(problem: ResolventProblem, f, method: str = "contraction",
                    rtol: float = 1e-13, max_iter: int | None = None) -> np.ndarray:
    """Solve ``u - k L u = f``.

    ``method="contraction"`` iterates the fixed-point map until the increment
    is at most ``(1 - theta) * rtol * ||f||_inf``, which bounds the error by
    ``rtol * ||f||_inf``.  When ``theta`` is so close to one that this falls
    under the roundoff floor of the update, iteration stops once the
    increment reaches that floor.  ``method="dense"`` is a direct solve used as
    an oracle (small operators only).
    """
    op = problem.operator
    f = np.asarray(f, dtype=np.float64)
    shape = f.shape
    f = f.reshape(op.vertex_count)
    if not np.all(np.isfinite(f)):
        raise ValueError("data must be finite")

    if method == "dense":
        if op.vertex_count > 512:
            raise ValueError("dense solve is limited to 512 vertices")
        M = np.eye(op.vertex_count) - problem.k * op.dense()
        return np.linalg.solve(M, f).reshape(shape)
    if method != "contraction":
        raise ValueError(f"unknown method {method!r}")

    fmax = float(np.max(np.abs(f))) if f.size else 0.0
    if fmax == 0.0:
        return np.zeros(shape)
    theta = problem.theta
    target = (1.0 - theta) * rtol * fmax
    floor = 8 * _EPS * fmax
    if max_iter is None:
        need = math.log(target / fmax) / math.log(theta) if 0 < theta < 1 else 1
        max_iter = int(100 + 4 * need)

    scale = 1.0 / (1.0 + problem.k * op.diag)
    kW = (problem.k * op.offdiag).tocsr()
    u = f * scale
    for _ in range(max_iter):
        u_new = (kW @ u + f) * scale
        inc = float(np.max(np.abs(u_new - u)))
        u = u_new
        if inc <= target or inc <= floor:
            return u.reshape(shape)
        if not np.isfinite(inc):
            break
    raise ConvergenceError(
        f"contraction iteration did not converge in {max_iter} steps (theta={theta:.6g}); "
        "operator is likely not diagonally dominant")


def to_edge_list(op: GraphLaplacianOp) -> str:
    """Text form: header ``N_v conservative_flag``, then ``i i w_ii`` and ``i j w_ij`` (i < j) lines."""
    lines = [f"{op.vertex_count} {int(op.conservative)}"]
    for i, w in enumerate(op.diag):
        lines.append(f"{i} {i} {float(w)!r}")
    upper = sp.triu(op.offdiag, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    for r, c, w in zip(upper.row[order], upper.col[order], upper.data[order]):
        lines.append(f"{r} {c} {float(w)!r}")
    return "\n".join(lines) + "\n"


def from_edge_list(text: str) -> GraphLaplacianOp:
    """Parse :func:`to_edge_list` output.

    Off-diagonal lines are undirected.  Diagonal lines are optional for a
    conservative operator (derived from the row sums) and required otherwise.
    """
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) != 2:
        raise ValueError("missing header line 'N_v conservative_flag'")
    n = int(rows[0][0])
    if n < 1 or rows[0][1] not in ("0", "1"):
        raise ValueError(f"bad header {' '.join(rows[0])!r}")
    flag = rows[0][1] == "1"
    diag = np.full(n, np.nan)
    edges: dict[tuple[int, int], float] = {}
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != 3:
            raise ValueError(f"line {lineno}: expected 'i j w'")
        i, j, w = int(r[0]), int(r[1]), float(r[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"line {lineno}: vertex index out of range")
        if not (math.isfinite(w) and w >= 0):
            raise ValueError(f"line {lineno}: weight must be finite and nonnegative")
        if i == j:
            diag[i] = w
            continue
        key = (min(i, j), max(i, j))
        if key in edges:
            raise ValueError(f"line {lineno}: duplicate edge {key}")
        edges[key] = w
    W = sp.lil_matrix((n, n))
    for (i, j), w in edges.items():
        W[i, j] = w
        W[j, i] = w
    if np.all(np.isnan(diag)):
        if not flag:
            raise ValueError("non-conservative operator requires explicit 'i i w_ii' lines")
        op = GraphLaplacianOp.from_weights(W.tocsr())
    elif np.any(np.isnan(diag)):
        raise ValueError("diagonal weights given for some vertices but not all")
    else:
        op = GraphLaplacianOp.from_weights(W.tocsr(), diag)
    if op.conservative != flag:
        raise ValueError(f"header says conservative={int(flag)} but weights give {int(op.conservative)}")
    return op
