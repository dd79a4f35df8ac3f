"""Utilities, success probability and the equilibrium set of the participation game."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .attractor import attractor_closed_form
from .design import MechanismDesign
from .model import (
    DegeneratePopulationError,
    PopulationProfile,
    PostType,
    SystemParams,
    participant_fractions,
    success_thresholds,
)

UTILITY_TOL = 1e-9

AI, NON_AI = "AI", "NonAI"


class NotApplicableError(ValueError):
    """Degradation metric requested for a design without a second equilibrium."""


def attractors(mu: PopulationProfile, params: SystemParams, design: MechanismDesign) -> tuple[float, float]:
    """(beta_F*, beta_R*) for the given profile."""
    fr = participant_fractions(mu, params.mu_a)
    return (
        attractor_closed_form(PostType.F, fr, params, design.w).beta_star,
        attractor_closed_form(PostType.R, fr, params, design.w).beta_star,
    )


def _is_all_abstain(mu, params):
    return mu.mu1 == 0 and mu.mu2 == 0


def success_prob(mu: PopulationProfile, theta: float, delta: float, params: SystemParams, design: MechanismDesign) -> float:
    """Probability that the tagging process meets (theta, delta)-success under profile mu.

    The profile where every non-adversarial user abstains has success
    probability 0 by convention.
    """
    if _is_all_abstain(mu, params):
        return 0.0
    fr = participant_fractions(mu, params.mu_a)
    theta_a, delta_a = success_thresholds(theta, delta, fr)
    beta_F, beta_R = attractors(mu, params, design)
    return params.p * (beta_F >= theta_a) + (1.0 - params.p) * (beta_R <= delta_a)


def utilities(mu: PopulationProfile, params: SystemParams, design: MechanismDesign) -> tuple[float, float, float]:
    """(U(0), U(1), U(2)) at profile mu."""
    P = success_prob(mu, design.target.theta, design.target.delta, params, design)
    den = mu.mu1 + params.mu_a + design.gamma * mu.mu2
    if den <= 0:
        if P != 0:
            raise DegeneratePopulationError("reward denominator mu1 + mu_a + gamma * mu2 is zero")
        share = 0.0
    else:
        share = design.R * P / den
    return (params.Q_np, params.Q_p + share, params.Q_p - params.C_e + design.gamma * share)


def utility(s: int, mu: PopulationProfile, params: SystemParams, design: MechanismDesign) -> float:
    if s not in (0, 1, 2):
        raise ValueError(f"strategy must be 0, 1 or 2, got {s!r}")
    return utilities(mu, params, design)[s]


def support(mu: PopulationProfile) -> tuple[int, ...]:
    return tuple(s for s, m in enumerate(mu.as_tuple()) if m > 0)


def is_best_response(mu: PopulationProfile, params: SystemParams, design: MechanismDesign, tol: float = UTILITY_TOL) -> bool:
    """Every strategy in the support of mu attains the maximum utility within ``tol``."""
    u = utilities(mu, params, design)
    best = max(u)
    return all(best - u[s] <= tol for s in support(mu))


def x_eta(design: MechanismDesign, params: SystemParams) -> tuple[float, bool]:
    """Type-1 fraction tying U(1) and U(2) at success probability 1 - p.

    Also returns whether it exceeds eta*_theta_tilde, the condition for a
    second equilibrium.
    """
    p = params.p
    x = p / (design.gamma - 1.0) + p * (1.0 - params.mu_a - design.eta) + design.eta
    return x, x > design.diagnostics.eta_star_tilde


@dataclass(frozen=True)
class EquilibriumPoint:
    profile: PopulationProfile
    classification: str
    success_prob: float
    utilities: tuple[float, float, float]
    attractors: tuple[float, float]


@dataclass(frozen=True)
class NeReport:
    ne_list: list[EquilibriumPoint]
    x_eta: float
    second_ne_exists: bool
    degradation_P: Optional[float]
    # True when "x_eta > eta*_theta_tilde" and the full equilibrium test disagree
    criteria_disagree: bool = False
    candidates: list = field(default_factory=list)


def _classify(mu, params, design):
    fr = participant_fractions(mu, params.mu_a)
    theta_a, delta_a = success_thresholds(design.target.theta, design.target.delta, fr)
    bF, bR = attractors(mu, params, design)
    cls = AI if (bF >= theta_a and bR <= delta_a) else NON_AI
    return EquilibriumPoint(
        profile=mu,
        classification=cls,
        success_prob=success_prob(mu, design.target.theta, design.target.delta, params, design),
        utilities=utilities(mu, params, design),
        attractors=(bF, bR),
    )


def _second_ne(design, params):
    """(exists, x, disagreement flag) for the profile mu_{x_eta}."""
    x, above = x_eta(design, params)
    full = False
    if x < 1.0 - params.mu_a:
        mu = PopulationProfile.mixed(x, params.mu_a)
        bF, _ = attractors(mu, params, design)
        full = above and bF < design.target.theta * (1.0 - params.mu_a) and is_best_response(mu, params, design)
    return full, x, above != full


def ne_set(design: MechanismDesign, params: SystemParams) -> NeReport:
    """Equilibria of the designed game: mu_eta and, when it exists, mu_{x_eta}."""
    points = [_classify(PopulationProfile.mixed(design.eta, params.mu_a), params, design)]
    exists, x, disagree = _second_ne(design, params)
    P = None
    if exists:
        points.append(_classify(PopulationProfile.mixed(x, params.mu_a), params, design))
        P = degradation_metric(design, params)
    return NeReport(points, x, exists, P, disagree)


def degradation_metric(design: MechanismDesign, params: SystemParams) -> float:
    """Percentage shortfall of beta_F at the second equilibrium relative to theta * (1 - mu_a)."""
    exists, x, _ = _second_ne(design, params)
    if not exists:
        raise NotApplicableError("the designed game has no second equilibrium")
    theta_a = design.target.theta * (1.0 - params.mu_a)
    bF, _ = attractors(PopulationProfile.mixed(x, params.mu_a), params, design)
    return 100.0 * (theta_a - bF) / theta_a


@dataclass(frozen=True)
class GridCandidate:
    profile: PopulationProfile  # grid point
    refined: Optional[PopulationProfile] = None  # tie location inside the grid cell, if any


def _tie_gap(mu0, x, total, params, design):
    mu = PopulationProfile(mu0, x, max(total - mu0 - x, 0.0))
    u = utilities(mu, params, design)
    return u[1] - u[2], u, mu


def _refine_tie(mu0, x_lo, x_hi, total, params, design, tol):
    """Bisect a sign change of U(1) - U(2) along mu1; None if it is a jump, not a tie."""
    d_lo = _tie_gap(mu0, x_lo, total, params, design)[0]
    for _ in range(200):
        if x_hi - x_lo <= 1e-14:
            break
        mid = 0.5 * (x_lo + x_hi)
        d_mid = _tie_gap(mu0, mid, total, params, design)[0]
        if (d_mid > 0) == (d_lo > 0) and d_mid != 0:
            x_lo, d_lo = mid, d_mid
        else:
            x_hi = mid
    for x in (x_lo, x_hi):
        d, u, mu = _tie_gap(mu0, x, total, params, design)
        # a continuous crossing leaves only a residual of size slope * 1e-14
        if abs(d) <= 1e-7 and max(u) - u[1] <= 1e-7 and (mu0 == 0 or max(u) - u[0] <= 1e-7):
            return mu
    return None


def _indicators(mu0, x, total, params, design):
    mu = PopulationProfile(mu0, x, max(total - mu0 - x, 0.0))
    fr = participant_fractions(mu, params.mu_a)
    theta_a, delta_a = success_thresholds(design.target.theta, design.target.delta, fr)
    bF, bR = attractors(mu, params, design)
    return bF >= theta_a, bR <= delta_a


def _switch_points(mu0, x_lo, x_hi, total, params, design):
    """Brackets (x_left, x_right) around each switch of the two success indicators.

    Along mu1 both attractors are monotone, so each indicator switches at most
    once inside a cell.
    """
    ends = (_indicators(mu0, x_lo, total, params, design), _indicators(mu0, x_hi, total, params, design))
    out = []
    for j in (0, 1):
        if ends[0][j] == ends[1][j]:
            continue
        lo, hi = x_lo, x_hi
        while hi - lo > 1e-14:
            mid = 0.5 * (lo + hi)
            if _indicators(mu0, mid, total, params, design)[j] == ends[0][j]:
                lo = mid
            else:
                hi = mid
        out.extend((lo, hi))
    return sorted(out)


def ne_grid_scan(design: MechanismDesign, params: SystemParams, grid_step: float, tol: float = UTILITY_TOL) -> list[GridCandidate]:
    """Screen the simplex {mu0 + mu1 + mu2 = 1 - mu_a} for equilibrium candidates.

    A grid point qualifies if it passes the best-response test exactly, or if
    a tie U(1) = U(2) that also satisfies the test lies between it and its
    neighbour along mu1 (ties on a continuum never land on grid points).  Each
    cell is split where the success probability jumps, so ties on narrow
    constant-probability pieces are not missed by coarse grids.
    """
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    total = 1.0 - params.mu_a
    out = []
    for mu0 in np.append(np.arange(0.0, total, grid_step), total):
        mu0 = float(min(mu0, total))
        rest = total - mu0
        xs = [float(x) for x in np.append(np.arange(0.0, rest, grid_step), rest)]
        for x in xs:
            mu = PopulationProfile(mu0, x, max(rest - x, 0.0))
            if is_best_response(mu, params, design, tol):
                out.append(GridCandidate(mu))
        for i in range(len(xs) - 1):
            pts = [xs[i], *_switch_points(mu0, xs[i], xs[i + 1], total, params, design), xs[i + 1]]
            gaps = [_tie_gap(mu0, x, total, params, design)[0] for x in pts]
            for j in range(len(pts) - 1):
                d0, d1 = gaps[j], gaps[j + 1]
                if (d0 > 0) == (d1 > 0) or d0 == 0 or d1 == 0:
                    continue
                tie = _refine_tie(mu0, pts[j], pts[j + 1], total, params, design, tol)
                if tie is None:
                    continue
                near = xs[i] if tie.mu1 - xs[i] <= xs[i + 1] - tie.mu1 else xs[i + 1]
                out.append(GridCandidate(PopulationProfile(mu0, near, max(rest - near, 0.0)), tie))
    return out
