"""Resolvent kernels and improved max-norm contraction for mean-zero data.

On the periodic 1D lattice the resolvent is a circular convolution
``u = c * f`` with a positive, unit-sum kernel ``c``.  Restricted to data with
zero sum it contracts strictly: the best constant is a linear maximization over
``{||s||_inf <= 1, sum s = 0}``, which has a closed form once ``c`` is sorted.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import GraphLaplacianOp, ResolventProblem, resolvent_solve


@dataclass(frozen=True, eq=False)
class ResolventKernel:
    N: int
    theta: float
    c: np.ndarray
    epsilon_sharp: float
    epsilon_perturbation: float

    def convolve(self, f) -> np.ndarray:
        """``(c * f)_k = sum_j c_{k-j} f_j`` with periodic indices."""
        return scipy.linalg.circulant(self.c) @ np.asarray(f, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class GeneralKernel:
    N_v: int
    columns: np.ndarray  # columns[i, l] = c_i^(l), response at i to a unit impulse at l
    epsilon0: float
    epsilon: float


def kernel_coefficients(N: int, theta: float) -> np.ndarray:
    """Impulse response of ``u_j = theta/2 (u_{j-1} + u_{j+1}) + (1 - theta) f_j``.

    Away from the impulse the response solves a homogeneous recurrence with
    roots ``r`` and ``1/r``, ``r = (1 - sqrt(1 - theta^2)) / theta``, so
    ``c_j`` is proportional to ``r^j + r^(N-j)``; the sum is normalized to one.
    Every term is positive, so tiny entries keep full relative accuracy.
    """
    _check_kernel_args(N, theta)
    r = theta / (1.0 + math.sqrt((1.0 - theta) * (1.0 + theta)))
    j = np.arange(N)
    c = r**j + r ** (N - j)
    return c / np.sum(c)


def kernel_coefficients_fourier(N: int, theta: float) -> np.ndarray:
    """Same kernel from its discrete Fourier symbol:
    ``c_j = (1-theta)/N sum_m cos(2 pi j m/N) / (1 - theta cos(2 pi m/N))``.

    Cancellation limits the absolute accuracy to about machine epsilon.
    """
    _check_kernel_args(N, theta)
    m = np.arange(N)
    angles = 2 * np.pi * np.outer(m, m) / N
    symbol = (1 - theta) / (1 - theta * np.cos(2 * np.pi * m / N))
    return np.cos(angles) @ symbol / N


def _check_kernel_args(N, theta):
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")


def maximize_linear_meanzero(c) -> tuple[float, np.ndarray]:
    """Maximize ``c . s`` over ``||s||_inf <= 1, sum(s) = 0`` for sorted nonnegative ``c``.

    The optimum puts -1 on the ``N//2`` smallest entries and +1 on the
    ``N//2`` largest (a single 0 in the middle when ``N`` is odd).
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("c must be a vector of length >= 2")
    if np.any(c < 0):
        raise ValueError("c must be nonnegative")
    if np.any(np.diff(c) < 0):
        raise ValueError("c must be sorted ascending; sort it and track the permutation")
    N = c.size
    m = N // 2
    value = float(np.sum(c[N - m:]) - np.sum(c[:m]))
    sigma = np.zeros(N)
    sigma[:m] = -1.0
    sigma[N - m:] = 1.0
    return value, sigma


def brute_force_meanzero_max(c) -> float:
    """Max of ``c . s`` over every extreme point of the mean-zero unit cube slice.

    Extreme points have all but one coordinate at +-1; the remaining one
    balances the sum and must land in [-1, 1].  Exponential in ``len(c)``.
    """
    c = np.asarray(c, dtype=np.float64)
    N = c.size
    best = -math.inf
    for free in range(N):
        rest = [j for j in range(N) if j != free]
        for signs in itertools.product((-1.0, 1.0), repeat=N - 1):
            s = np.empty(N)
            s[rest] = signs
            s[free] = -sum(signs)
            if abs(s[free]) <= 1:
                best = max(best, float(c @ s))
    return best


def _sorted_maximizer(c: np.ndarray) -> tuple[float, np.ndarray]:
    order = np.argsort(c, kind="stable")
    value, sigma_sorted = maximize_linear_meanzero(c[order])
    sigma = np.empty_like(sigma_sorted)
    sigma[order] = sigma_sorted
    return value, sigma


def sharp_meanzero_constant(kernel: ResolventKernel | np.ndarray) -> float:
    c = kernel.c if isinstance(kernel, ResolventKernel) else np.asarray(kernel, dtype=np.float64)
    return _sorted_maximizer(c)[0]


def extremal_meanzero_data(kernel: ResolventKernel) -> np.ndarray:
    """Mean-zero ``f`` with ``||f||_inf = 1`` and ``(c * f)_0 = epsilon_sharp``."""
    _, sigma = _sorted_maximizer(kernel.c)
    N = kernel.N
    # (c * f)_0 = sum_j c_{-j} f_j, so f_j = sigma_{-j}
    return sigma[(-np.arange(N)) % N]


def kernel_1d_periodic(N: int, theta: float) -> ResolventKernel:
    c = kernel_coefficients(N, theta)
    eps_sharp = sharp_meanzero_constant(c)
    eps_pert = 1.0 - N * float(np.min(c))
    return ResolventKernel(int(N), float(theta), c, eps_sharp, eps_pert)


def general_kernel(op: GraphLaplacianOp, k: float) -> GeneralKernel:
    """Impulse responses of ``(I - k L)^{-1}`` and the perturbative mean-zero constant.

    For mean-zero ``f``, ``||u||_inf <= (1 - N_v * epsilon0) ||f||_inf`` where
    ``epsilon0`` is the smallest impulse-response entry.
    """
    if not op.conservative:
        raise ValueError("general kernel requires a conservative operator")
    problem = ResolventProblem(op, k)
    n = op.vertex_count
    columns = np.empty((n, n))
    for l in range(n):
        delta = np.zeros(n)
        delta[l] = 1.0
        columns[:, l] = resolvent_solve(problem, delta)
    eps0 = float(np.min(columns))
    if not op.is_connected() or eps0 <= 0:
        warnings.warn("operator graph is disconnected: epsilon0 = 0 and the improved bound is vacuous",
                      RuntimeWarning, stacklevel=2)
        eps0 = 0.0
    return GeneralKernel(n, columns, eps0, 1.0 - n * eps0)
