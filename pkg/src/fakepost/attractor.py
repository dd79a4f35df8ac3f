"""Limiting fraction of fake tags for a population profile.

Under the polynomial response with the designed warning, the mean drift is

    g_u(beta) = alpha_u * eta + (1 - eta - eta_a) * min{m_u * beta, 1} - beta,

which is piecewise linear with a single kink at beta = 1 / m_u.  Three routes
to its zero are provided: a closed form, bisection (used as an oracle) and the
exact solution of the ODE d(beta)/dt = g_u(beta).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import ParticipantFractions, PostType, SystemParams, effective_slope


class Regime(enum.Enum):
    SATURATED = "Saturated"  # r = 1 at the attractor
    INTERIOR = "Interior"  # r < 1 at the attractor


class NoRootError(RuntimeError):
    pass


@dataclass(frozen=True)
class AttractorResult:
    beta_star: float
    regime: Regime
    rho_bar: float
    rho: float


def _branch_constants(u, fr, params, w):
    alpha_u = params.capacity(u)
    m = effective_slope(u, params, w)
    rho_bar = alpha_u * fr.eta + fr.eta_2
    rho = 1.0 - fr.eta_2 * m
    return alpha_u, m, rho_bar, rho


def ode_rhs(u: PostType, beta: float, fr: ParticipantFractions, params: SystemParams, w: float) -> float:
    """Mean drift g_u(beta) of the tagging fraction."""
    alpha_u = params.capacity(u)
    m = effective_slope(u, params, w)
    return alpha_u * fr.eta + fr.eta_2 * min(m * beta, 1.0) - beta


def attractor_closed_form(u: PostType, fr: ParticipantFractions, params: SystemParams, w: float) -> AttractorResult:
    """Unique asymptotically stable zero of g_u.

    When eta = 0 and the saturated branch applies, beta = 0 is an additional
    (unstable) zero; the stable one is returned.
    """
    alpha_u, m, rho_bar, rho = _branch_constants(u, fr, params, w)
    if rho <= 0 or m * rho_bar >= 1.0:
        return AttractorResult(rho_bar, Regime.SATURATED, rho_bar, rho)
    return AttractorResult(alpha_u * fr.eta / rho, Regime.INTERIOR, rho_bar, rho)


def attractor_bisection(
    u: PostType,
    fr: ParticipantFractions,
    params: SystemParams,
    w: float,
    tol: float = 1e-13,
) -> float:
    """Zero of g_u on [0, 1] by bisection, independent of the closed form.

    Keeps g(lo) >= 0 >= g(hi); moving ``lo`` only on a strictly positive drift
    means the stable zero is found even when beta = 0 is also a zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = lambda b: ode_rhs(u, b, fr, params, w)  # noqa: E731
    lo, hi = 0.0, 1.0
    if g(lo) < 0 or g(hi) > 0:
        raise NoRootError(f"drift has no sign change on [0, 1]: g(0)={g(lo)!r}, g(1)={g(hi)!r}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _relax(beta0: float, target: float, rate: float, t: np.ndarray) -> np.ndarray:
    # solution of d(beta)/dt = rate * (target - beta); rate = 0 handled by caller
    return target + np.exp(-rate * t) * (beta0 - target)


def ode_trajectory(
    u: PostType,
    beta0: float,
    fr: ParticipantFractions,
    params: SystemParams,
    w: float,
    t_grid,
) -> np.ndarray:
    """Exact solution of d(beta)/dt = g_u(beta) sampled on ``t_grid``.

    Returns an array of shape (len(t_grid), 2) holding (t, beta).  Within each
    linear branch the solution is an exponential relaxation; the single
    possible branch switch happens at the closed-form time tau where
    m_u * beta(tau) = 1.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing and start at 0")
    if not 0 <= beta0 <= 1:
        raise ValueError("beta0 must lie in [0, 1]")
    alpha_u, m, rho_bar, rho = _branch_constants(u, fr, params, w)
    kink = 1.0 / m
    drive = alpha_u * fr.eta

    def interior(b0, tt):
        if rho == 0:
            return b0 + drive * tt
        return _relax(b0, drive / rho, rho, tt)

    def interior_hit_time(b0):
        # time at which the interior branch reaches the kink, or inf
        if rho == 0:
            return (kink - b0) / drive if drive > 0 else math.inf
        fixed = drive / rho
        if fixed == b0:
            return math.inf
        ratio = (kink - fixed) / (b0 - fixed)
        if ratio <= 0 or (rho > 0 and ratio >= 1) or (rho < 0 and ratio <= 1):
            return math.inf
        return -math.log(ratio) / rho

    beta = np.empty_like(t)
    if m * beta0 >= 1.0:
        # saturated start: relax toward rho_bar until the kink (if rho_bar lies below it)
        if m * rho_bar >= 1.0 or beta0 == rho_bar:
            beta[:] = _relax(beta0, rho_bar, 1.0, t)
        else:
            tau = math.log((beta0 - rho_bar) / (kink - rho_bar))
            first = t < tau
            beta[first] = _relax(beta0, rho_bar, 1.0, t[first])
            beta[~first] = interior(kink, t[~first] - tau)
            beta[~first] = np.minimum(beta[~first], kink)
    else:
        tau = interior_hit_time(beta0)
        first = t < tau
        beta[first] = interior(beta0, t[first])
        if not math.isinf(tau):
            beta[first] = np.minimum(beta[first], kink)
            beta[~first] = _relax(kink, rho_bar, 1.0, t[~first] - tau)
    return np.column_stack([t, beta])
