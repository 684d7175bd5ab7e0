"""Closed-form stability constants for the stabilized semi-implicit scheme.

Writing ``k = nu/tau``, the scheme keeps ``||u^n||_inf <= M`` for every
``M`` in the window ``[M0, M1]`` once ``A >= A_cr = 1 + 2 sqrt(1 + 4k/3)``;
the window collapses to a point exactly at ``A = A_cr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InadmissibleError(ValueError):
    """Raised when a quantity is undefined because ``A`` is below threshold."""


@dataclass(frozen=True)
class SchemeParams:
    nu: float
    tau: float
    A: float

    def __post_init__(self):
        for name in ("nu", "tau", "A"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.A < 0:
            raise ValueError(f"A must be nonnegative, got {self.A}")

    @property
    def k(self) -> float:
        return self.nu / self.tau


@dataclass(frozen=True)
class StabilityCertificate:
    A_cr: float
    beta: float
    M0: float
    M1: float
    M: float
    admissible: bool
    linf_u0: float

    def summary(self) -> str:
        verdict = "admissible" if self.admissible else "inadmissible"
        return (f"A_cr={self.A_cr!r} beta={self.beta!r} M0={self.M0!r} M1={self.M1!r} "
                f"M={self.M!r} verdict={verdict}")


def critical_A(nu: float, tau: float) -> float:
    if not (nu > 0 and tau > 0):
        raise ValueError(f"nu and tau must be positive, got nu={nu}, tau={tau}")
    return 1.0 + 2.0 * math.sqrt(1.0 + (4.0 / 3.0) * nu / tau)


def splitting_beta(params: SchemeParams) -> float:
    """Larger root of ``beta (1 - beta) = nu / (A^2 tau)``, in ``[1/2, 1)``."""
    if params.A == 0:
        raise InadmissibleError("A = 0 admits no splitting")
    q = params.k / params.A**2
    if q > 0.25:
        raise InadmissibleError(f"nu/(A^2 tau) = {q!r} exceeds 1/4")
    return 0.5 + math.sqrt(0.25 - q)


def splitting_pair(params: SchemeParams) -> tuple[float, float]:
    """``(beta, 1 - beta)`` with the complement computed as ``q / beta``.

    Forming ``1 - beta`` by subtraction loses digits as ``beta -> 1``.
    """
    beta = splitting_beta(params)
    return beta, params.k / params.A**2 / beta


def bound_window(params: SchemeParams) -> tuple[float, float]:
    """``(M0, M1)``; raises :class:`InadmissibleError` if the window is empty."""
    M0, M1 = _window(params)
    if M0 > M1 * (1 + 1e-12):
        raise InadmissibleError(f"empty window: M0={M0!r} > M1={M1!r}")
    return M0, M1


def _window(params: SchemeParams) -> tuple[float, float]:
    _, one_minus_beta = splitting_pair(params)
    M0 = 2.0 * math.sqrt((1.0 + one_minus_beta * params.A) / 3.0)
    M1 = math.sqrt((params.A + 1.0) / 3.0)
    return M0, M1


def certify(params: SchemeParams, linf_u0: float = 0.0, M: float | None = None) -> StabilityCertificate:
    """Check the hypotheses of the uniform max-norm bound.

    Inadmissibility is a verdict, not an error; constants that are undefined
    below threshold come back as ``nan``.  ``M`` defaults to ``M1``.
    """
    A_cr = critical_A(params.nu, params.tau)
    M1 = math.sqrt((params.A + 1.0) / 3.0)
    try:
        beta = splitting_beta(params)
        M0, _ = _window(params)
    except InadmissibleError:
        beta = M0 = math.nan
    if M is None:
        M = M1
    in_window = (M <= M1 * (1 + 1e-12)) and (not math.isnan(M0)) and M0 <= M * (1 + 1e-12)
    admissible = params.A >= A_cr and linf_u0 <= M and in_window
    return StabilityCertificate(A_cr, beta, M0, M1, M, bool(admissible), float(linf_u0))


def cubic_envelope(alpha: float, L: float, branch: str = "f1") -> tuple[float, float, bool]:
    """Max of ``|g|`` on ``[-L, L]`` for ``g = x^3 - alpha x`` (f1) or ``-x^3 + alpha x`` (f2).

    Returns ``(max_abs, g(L), max_abs <= g(L))``.  The inequality is guaranteed
    for f1 when ``L >= 2 sqrt(alpha/3)`` and for f2 when ``L <= sqrt(alpha/3)``.
    """
    if not (alpha > 0 and L > 0):
        raise ValueError("alpha and L must be positive")
    if branch == "f1":
        g = lambda x: x**3 - alpha * x
    elif branch == "f2":
        g = lambda x: -(x**3) + alpha * x
    else:
        raise ValueError(f"unknown branch {branch!r}")
    xc = math.sqrt(alpha / 3.0)
    candidates = [L]
    if xc <= L:
        candidates.append(xc)
    # |g| is even, so the negative half adds nothing
    max_abs = max(abs(g(x)) for x in candidates)
    endpoint = g(L)
    holds = max_abs <= endpoint + 8 * 2.220446049250313e-16 * abs(endpoint)
    return max_abs, endpoint, holds


def unstabilized_tau_heuristic(nu: float, lipschitz_L: float) -> float:
    """``8 nu / L^2``: the step bound energy decay demands of the unstabilized (A = 0) scheme.

    Heuristic only. ``L`` bounds ``|f'|`` along the step.
    """
    if not (nu > 0 and lipschitz_L > 0):
        raise ValueError("inputs must be positive")
    return 8.0 * nu / lipschitz_L**2
