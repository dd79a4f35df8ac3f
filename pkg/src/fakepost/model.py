"""Domain parameters, the response/warning functions and (theta, delta)-success thresholds.

Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

SIMPLEX_TOL = 1e-12


class PostType(enum.Enum):
    F = "F"
    R = "R"


class DegeneratePopulationError(ValueError):
    """Raised when nobody participates (mu_a = 0 and mu0 = 1)."""


@dataclass(frozen=True)
class SystemParams:
    alpha_R: float
    alpha_F: float
    mu_a: float
    p: float
    a: float
    b: float = 1.0
    c: float = 1.0
    C_e: float = 1.0
    Q_p: float = 1.0
    Q_np: float = 0.5

    @property
    def delta_R(self) -> float:
        return self.alpha_F / self.alpha_R

    def capacity(self, u: PostType) -> float:
        return self.alpha_F if u is PostType.F else self.alpha_R


@dataclass(frozen=True)
class DesignTarget:
    theta: float
    delta: float


@dataclass(frozen=True)
class PopulationProfile:
    """Fractions of non-adversarial users choosing strategy 0, 1 and 2.

    The adversarial fraction mu_a is implicit: mu0 + mu1 + mu2 = 1 - mu_a.
    """

    mu0: float
    mu1: float
    mu2: float

    @classmethod
    def mixed(cls, x: float, mu_a: float) -> "PopulationProfile":
        """The profile (0, x, 1 - x - mu_a): no abstainers, x type-1 users."""
        return cls(0.0, x, 1.0 - x - mu_a)

    def check(self, mu_a: float, tol: float = SIMPLEX_TOL) -> None:
        if min(self.mu0, self.mu1, self.mu2) < 0:
            raise ValueError(f"negative population fraction in {self}")
        total = self.mu0 + self.mu1 + self.mu2
        if abs(total - (1.0 - mu_a)) > tol:
            raise ValueError(f"profile sums to {total!r}, expected 1 - mu_a = {1.0 - mu_a!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mu0, self.mu1, self.mu2)


@dataclass(frozen=True)
class ParticipantFractions:
    eta: float
    eta_a: float

    @property
    def eta_2(self) -> float:
        """Fraction of type-2 users among participants."""
        return 1.0 - self.eta - self.eta_a


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return "fail: " + "; ".join(self.violations)


def validate_system(params: SystemParams, target: DesignTarget) -> ValidationReport:
    """Check every standing assumption on the parameters and the design target.

    All violated constraints are collected; nothing is raised.
    """
    v = []
    pr, tg = params, target
    if not 0 < pr.alpha_R < 1:
        v.append("alpha_R not in (0, 1)")
    if not 0 < pr.alpha_F < 1:
        v.append("alpha_F not in (0, 1)")
    if pr.alpha_F <= pr.alpha_R:
        v.append("alpha_F <= alpha_R")
    if not 0 <= pr.mu_a < 1:
        v.append("mu_a not in [0, 1)")
    if not 0 < pr.p < 1:
        v.append("p not in (0, 1)")
    for name in ("a", "b", "c"):
        if not getattr(pr, name) > 0:
            v.append(f"{name} <= 0")
    if not pr.C_e > 0:
        v.append("C_e <= 0")
    if pr.Q_np > pr.Q_p:
        v.append("Q_np > Q_p")
    if tg.delta <= pr.alpha_R:
        v.append("delta <= alpha_R")
    if tg.delta >= tg.theta:
        v.append("delta >= theta")
    if tg.theta > 1:
        v.append("theta > 1")
    if pr.alpha_R > 0 and pr.alpha_F > 0:
        floor = max(pr.alpha_F, tg.delta / pr.delta_R ** pr.a)
        if tg.theta <= floor:
            v.append("theta <= max(alpha_F, delta / Delta_R^a)")
    return ValidationReport(v)


def participant_fractions(mu: PopulationProfile, mu_a: float) -> ParticipantFractions:
    n = mu.mu1 + mu.mu2 + mu_a
    if n <= 0:
        raise DegeneratePopulationError("no participants: mu1 + mu2 + mu_a = 0")
    return ParticipantFractions(eta=mu.mu1 / n, eta_a=mu_a / n)


def warning_level(beta: float, w: float, a: float, b: float, alpha_R: float) -> float:
    """Warning shown to type-2 users when a fraction ``beta`` of tags so far are 'fake'."""
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta!r}")
    return w ** (1.0 / b) * alpha_R ** ((1.0 - a) / b) * beta ** (1.0 / b)


def response(alpha: float, omega: float, a: float, b: float, c: float) -> float:
    """Probability a warning-reading user tags the post as fake: min{c alpha^a omega^b, 1}."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega!r}")
    return min(c * alpha**a * omega**b, 1.0)


def effective_slope(u: PostType, params: SystemParams, w: float) -> float:
    """Slope m_u with response(alpha_u, warning_level(beta)) == min{m_u * beta, 1}.

    Only the product c * w * alpha_R matters; b drops out entirely.
    """
    alpha_u = params.capacity(u)
    return params.c * w * params.alpha_R * (alpha_u / params.alpha_R) ** params.a


def success_thresholds(theta: float, delta: float, fr: ParticipantFractions) -> tuple[float, float]:
    """Thresholds on the overall fake-tag fraction, discounted for adversarial participants."""
    scale = 1.0 - fr.eta_a
    return theta * scale, delta * scale
