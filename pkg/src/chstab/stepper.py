"""Stabilized semi-implicit stepping for the Cahn-Hilliard equation

    (u+ - u)/tau = -nu L^2 u+ + A L (u+ - u) + L f(u),     f(u) = u^3 - u,

where ``L`` is either the pseudo-spectral Laplacian on the torus or a graph
Laplacian.  Each step can be audited against the per-step energy inequality

    E(u+) + A/2 ||u+ - u||^2 + tau ||grad H||^2 <= E(u),
    H = -nu L u+ + A (u+ - u) + f(u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import field as fc
from .config import RunConfig, make_rng
from .field import Field, TorusGrid
from .graph import (ConvergenceError, GraphLaplacianOp, ResolventProblem, central_difference_1d,
                    five_point_2d, resolvent_solve)
from .io import read_snapshot
from .theory import SchemeParams, bound_window, splitting_pair


def nonlinearity(u):
    return u**3 - u


def double_well(u):
    return 0.25 * (u * u - 1.0) ** 2


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    linf: float
    mean: float
    increment_l2: float
    grad_H_l2: float
    dissipation_residual: float


@dataclass(frozen=True, eq=False)
class StepperState:
    n: int
    t: float
    u: object  # Field (spectral) or ndarray (graph)
    history: tuple = ()


# --------------------------------------------------------------------------- backends


class SpectralBackend:
    """Pseudo-spectral Laplacian on the torus; ``f(u)`` evaluated at grid points."""

    def __init__(self, grid: TorusGrid, dealias: bool = False):
        self.grid = grid
        self.dealias = dealias
        self.k2 = grid.k_squared

    def values(self, u) -> np.ndarray:
        return u.values if isinstance(u, Field) else np.asarray(u, dtype=np.float64).reshape(self.grid.shape)

    def wrap(self, v) -> Field:
        return Field(self.grid, v)

    def _multiply(self, v, mult) -> np.ndarray:
        return np.fft.ifftn(np.fft.fftn(v) * mult).real

    def laplacian(self, v) -> np.ndarray:
        return self._multiply(v, -self.k2)

    def resolvent(self, v, k: float) -> np.ndarray:
        """``(I - k L)^{-1} v``."""
        return self._multiply(v, 1.0 / (1.0 + k * self.k2))

    def nonlinear(self, v) -> np.ndarray:
        g = nonlinearity(v)
        if self.dealias:
            g = fc.dealias(Field(self.grid, g)).values
        return g

    def solve_step(self, v, params: SchemeParams) -> np.ndarray:
        nu, tau, A = params.nu, params.tau, params.A
        k2 = self.k2
        vh = np.fft.fftn(v)
        gh = np.fft.fftn(self.nonlinear(v))
        num = (1.0 + A * tau * k2) * vh - tau * k2 * gh
        den = 1.0 + nu * tau * k2**2 + A * tau * k2
        return np.fft.ifftn(num / den).real

    @property
    def weight(self) -> float:
        return self.grid.cell_volume

    def grad_sq(self, v) -> float:
        """``||grad v||_2^2 = (v, -L v)`` via Parseval."""
        vh = np.fft.fftn(v) / self.grid.size
        return (2 * math.pi) ** self.grid.dim * float(np.sum(self.k2 * np.abs(vh) ** 2))


class GraphBackend:
    """Graph Laplacian on vertices laid out as an array of ``shape``."""

    def __init__(self, op: GraphLaplacianOp, weight: float, shape=None, rtol: float = 1e-13):
        self.op = op
        self.weight = weight
        self.shape = tuple(shape) if shape is not None else (op.vertex_count,)
        self.rtol = rtol
        self.last_iterations = 0

    def values(self, u) -> np.ndarray:
        v = u.values if isinstance(u, Field) else u
        return np.asarray(v, dtype=np.float64).reshape(self.shape)

    def wrap(self, v) -> np.ndarray:
        return np.asarray(v, dtype=np.float64).reshape(self.shape)

    def laplacian(self, v) -> np.ndarray:
        return self.op.apply(v)

    def resolvent(self, v, k: float) -> np.ndarray:
        return resolvent_solve(ResolventProblem(self.op, k), v)

    def nonlinear(self, v) -> np.ndarray:
        return nonlinearity(v)

    def system(self, params: SchemeParams):
        nu, tau, A = params.nu, params.tau, params.A
        L = self.op.apply
        return lambda x: x + tau * L(nu * L(x) - A * x)

    def solve_step(self, v, params: SchemeParams) -> np.ndarray:
        # solve for the increment: its right side sums to zero for conservative
        # operators and CG then keeps the iterates in the zero-sum subspace
        L = self.op.apply
        v = v.reshape(self.op.vertex_count)
        g = self.nonlinear(v)
        rhs_full = v - params.A * params.tau * L(v) + params.tau * L(g)
        rhs_inc = params.tau * L(g - params.nu * L(v))
        tol = self.rtol * float(np.linalg.norm(rhs_full))
        delta, self.last_iterations = conjugate_gradient(self.system(params), rhs_inc, tol)
        return (v + delta).reshape(self.shape)

    def grad_sq(self, v) -> float:
        v = v.reshape(self.op.vertex_count)
        return self.weight * float(-v @ self.op.apply(v))


def conjugate_gradient(matvec, b: np.ndarray, tol: float, max_iter: int | None = None):
    """Plain CG from a zero initial guess; stops when ``||b - S x||_2 <= tol``.

    Returns ``(x, iterations)``.  A nonpositive curvature ``p.Sp`` means the
    system is not symmetric positive definite.
    """
    n = b.size
    if max_iter is None:
        max_iter = 10 * n + 100
    x = np.zeros_like(b)
    r = b.copy()
    rr = float(r @ r)
    if math.sqrt(rr) <= tol:
        return x, 0
    p = r.copy()
    for it in range(1, max_iter + 1):
        Sp = matvec(p)
        curv = float(p @ Sp)
        if not curv > 0:
            raise ConvergenceError("CG met nonpositive curvature: system is not SPD")
        alpha = rr / curv
        x += alpha * p
        r -= alpha * Sp
        rr_new = float(r @ r)
        if math.sqrt(rr_new) <= tol:
            # confirm with the true residual; recursive residuals drift
            r = b - matvec(x)
            rr_new = float(r @ r)
            if math.sqrt(rr_new) <= tol:
                return x, it
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise ConvergenceError(f"CG did not reach tolerance {tol:.3g} in {max_iter} iterations")


# --------------------------------------------------------------------------- energy


def energy(u, nu: float, backend=None) -> float:
    """Discrete free energy ``sum h^d (nu/2 |grad u|^2 + F(u))``.

    With the default spectral backend the gradient term is exact for
    trigonometric polynomials resolved by the grid.
    """
    if backend is None:
        backend = SpectralBackend(u.grid)
    v = backend.values(u)
    return 0.5 * nu * backend.grad_sq(v) + backend.weight * float(np.sum(double_well(v)))


def dissipation_report(u_prev, u_next, params: SchemeParams, backend=None) -> EnergyReport:
    if backend is None:
        backend = SpectralBackend(u_next.grid)
    a = backend.values(u_prev)
    b = backend.values(u_next)
    diff = b - a
    H = -params.nu * backend.laplacian(b) + params.A * diff + backend.nonlinear(a)
    e_prev = energy(a, params.nu, backend)
    e_next = energy(b, params.nu, backend)
    inc_sq = backend.weight * float(np.sum(diff * diff))
    gradH_sq = max(backend.grad_sq(H), 0.0)
    residual = e_prev - e_next - 0.5 * params.A * inc_sq - params.tau * gradH_sq
    return EnergyReport(
        energy=e_next,
        linf=float(np.max(np.abs(b))),
        mean=float(np.mean(b)),
        increment_l2=math.sqrt(inc_sq),
        grad_H_l2=math.sqrt(gradH_sq),
        dissipation_residual=residual,
    )


def initial_report(u, nu: float, backend) -> EnergyReport:
    v = backend.values(u)
    return EnergyReport(energy(v, nu, backend), float(np.max(np.abs(v))), float(np.mean(v)),
                        math.nan, math.nan, math.nan)


# --------------------------------------------------------------------------- steps


def _advance(state: StepperState, params: SchemeParams, backend, v_next, audit: bool) -> StepperState:
    u_next = backend.wrap(v_next)
    history = state.history
    if audit:
        history = history + (dissipation_report(state.u, u_next, params, backend),)
    return StepperState(state.n + 1, (state.n + 1) * params.tau, u_next, history)


def step(state: StepperState, params: SchemeParams, backend, audit: bool = True) -> StepperState:
    return _advance(state, params, backend, backend.solve_step(backend.values(state.u), params), audit)


def step_spectral(state: StepperState, params: SchemeParams, dealias: bool = False,
                  audit: bool = True) -> StepperState:
    """Solve ``(1 + nu tau |k|^4 + A tau |k|^2) u+^ = (1 + A tau |k|^2) u^ - tau |k|^2 f(u)^``."""
    return step(state, params, SpectralBackend(state.u.grid, dealias), audit)


def step_graph(state: StepperState, params: SchemeParams, op: GraphLaplacianOp,
               weight: float = 1.0, audit: bool = True) -> StepperState:
    """Solve ``(I + nu tau L^2 - A tau L) u+ = (I - A tau L) u + tau L f(u)`` by CG."""
    shape = np.shape(state.u)
    return step(state, params, GraphBackend(op, weight, shape), audit)


def invariant_region_step(state: StepperState, params: SchemeParams, backend,
                          audit: bool = True) -> StepperState:
    """The same step computed through the factorization behind the max-norm bound.

    With ``beta (1 - beta) A^2 tau = nu`` the step matrix factors as
    ``(I - beta A tau L)(I - (1-beta) A tau L)`` and

        u+ = R_{(1-beta)A tau} [ f2(u) + R_{beta A tau} f1(u) ] / (beta A),
        f1(u) = u^3 - ((1-beta)A + 1) u,   f2(u) = -u^3 + (A + 1) u,

    with ``R_k = (I - k L)^{-1}``.  Both resolvents are max-norm
    nonexpansive, which is where the bound comes from.
    """
    beta, one_minus_beta = splitting_pair(params)
    bound_window(params)  # rejects A below threshold
    A, tau = params.A, params.tau
    v = backend.values(state.u)
    f1 = v**3 - (one_minus_beta * A + 1.0) * v
    f2 = -(v**3) + (A + 1.0) * v
    w = (f2 + backend.resolvent(f1, beta * A * tau)) / (beta * A)
    v_next = backend.resolvent(w, one_minus_beta * A * tau)
    return _advance(state, params, backend, v_next, audit)


# --------------------------------------------------------------------------- runs from a config


def make_backend(config: RunConfig):
    """Backend and the quadrature weight of one grid cell for a run config."""
    N = config.points_per_dim
    if config.scheme == "spectral":
        return SpectralBackend(TorusGrid(config.dim, N), config.dealias)
    if config.dim == 1:
        dx = 2 * math.pi / (N if config.bc == "periodic" else N + 1)
        return GraphBackend(central_difference_1d(N, dx, config.bc), dx, (N,))
    h = 2 * math.pi / N
    return GraphBackend(five_point_2d(N, h), h * h, (N, N))


def initial_values(config: RunConfig) -> np.ndarray:
    """Initial data on the config's grid.

    ``random``: PCG64(seed) uniform on [-0.1, 0.1], mean removed, rescaled to
    keep max |u| <= 0.1.  ``cosine``: ``0.5 cos(x_1)``.  ``file:<path>``: a CHF1
    snapshot with matching extents.
    """
    N, d = config.points_per_dim, config.dim
    shape = (N,) * d
    if config.initial == "zero":
        return np.zeros(shape)
    if config.initial == "random":
        v = make_rng(config.seed).uniform(-0.1, 0.1, size=shape)
        v -= v.mean()
        peak = np.max(np.abs(v))
        if peak > 0.1:
            v *= 0.1 / peak
        return v
    if config.initial == "cosine":
        if config.scheme == "graph" and config.bc == "dirichlet":
            x = -math.pi + (2 * math.pi / (N + 1)) * np.arange(1, N + 1)
        else:
            x = -math.pi + (2 * math.pi / N) * np.arange(N)
        X = np.meshgrid(*([x] * d), indexing="ij")
        return 0.5 * np.cos(X[0])
    path = config.initial[len("file:"):]
    v = read_snapshot(path)
    if v.shape != shape:
        raise ValueError(f"snapshot extents {v.shape} do not match grid {shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("snapshot contains non-finite values")
    return v


def initial_state(config: RunConfig, backend=None) -> StepperState:
    backend = backend or make_backend(config)
    return StepperState(0, 0.0, backend.wrap(initial_values(config)))


def decay_holds(config: RunConfig, tau: float, slack: float = 1e-12) -> bool:
    """Does ``E(u^{n+1}) <= E(u^n) (1 + slack)`` hold for every step up to ``config.steps``?"""
    params = SchemeParams(config.nu, tau, config.A)
    backend = make_backend(config)
    v = backend.values(initial_state(config, backend).u)
    e = energy(v, config.nu, backend)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.steps):
            try:
                v = backend.solve_step(v, params)
            except ConvergenceError:
                return False
            if not np.all(np.isfinite(v)):
                return False
            e_next = energy(v, config.nu, backend)
            if not (e_next <= e + slack * abs(e)):
                return False
            e = e_next
    return True


class NotBracketedError(ValueError):
    pass


def find_critical_tau(config: RunConfig, tau_lo: float, tau_hi: float, rel_tol: float = 1e-2) -> float:
    """Largest step (to relative width ``rel_tol``) with monotone energy decay.

    Geometric bisection on :func:`decay_holds`; ``tau_lo`` must decay and
    ``tau_hi`` must not, unless the two coincide.
    """
    if not (0 < tau_lo <= tau_hi):
        raise ValueError("need 0 < tau_lo <= tau_hi")
    if not decay_holds(config, tau_lo):
        raise NotBracketedError(f"energy decay already fails at tau_lo={tau_lo!r}")
    if tau_lo == tau_hi:
        return tau_lo
    if decay_holds(config, tau_hi):
        raise NotBracketedError(f"energy decay still holds at tau_hi={tau_hi!r}")
    lo, hi = tau_lo, tau_hi
    while hi / lo - 1 > rel_tol:
        mid = math.sqrt(lo * hi)
        if decay_holds(config, mid):
            lo = mid
        else:
            hi = mid
    return lo
