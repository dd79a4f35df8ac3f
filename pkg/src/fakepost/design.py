"""Mechanism design: pick (theta_tilde, w, eta, gamma, R) for a target (theta, delta).

The warning scale is only ever pinned down through the product c * w * alpha_R
(called the *scale* below); all intervals are expressed on that scale.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Union

from .model import DesignTarget, SystemParams, validate_system

AUTO_EPS_MARGIN = 1e-3


class KnobError(ValueError):
    """An explicit knob value falls outside the interval allowed at design time."""


class BoundaryDegenerateError(ZeroDivisionError):
    pass


class InfeasibleIntervalError(ValueError):
    pass


# reason codes carried by NotDesignable
OUTSIDE_REGION = "outside_region"
HYPOTHESIS = "hypothesis_violation"
THETA_TILDE_EDGE = "theta_tilde_edge"


@dataclass(frozen=True)
class NotDesignable:
    reason: str
    detail: str = ""

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class DesignKnobs:
    """Free choices left open by the design procedure.

    ``eps`` is the theta-tilde increment ("auto" = needed minimum + ``eps_margin``),
    ``eps1`` the offset of the scale above the lower end of its interval and
    ``eps2`` the offset of eta above eta_bar ("midpoint" = half the interval).
    """

    eps: Union[str, float] = "auto"
    eps1: Union[str, float] = "midpoint"
    eps2: Union[str, float] = "midpoint"
    gamma_margin: float = 0.2
    eps_margin: float = AUTO_EPS_MARGIN

    def __post_init__(self):
        if not self.gamma_margin > 0:
            raise KnobError("gamma_margin must be positive")
        if not self.eps_margin > 0:
            raise KnobError("eps_margin must be positive")
        for name in ("eps", "eps1", "eps2"):
            value = getattr(self, name)
            if isinstance(value, str) and value != ("auto" if name == "eps" else "midpoint"):
                raise KnobError(f"unknown rule {value!r} for {name}")


@dataclass(frozen=True)
class DesignDiagnostics:
    f_value: float
    kappa: float
    K_delta: float
    theta_2: float
    theta_star: float
    w_interval: tuple[float, float]
    eta_bar: float
    eta_star_tilde: float
    gamma_lower: float


@dataclass(frozen=True)
class MechanismDesign:
    theta_tilde: float
    w: float
    eta: float
    gamma: float
    R: float
    diagnostics: DesignDiagnostics
    target: DesignTarget
    knobs: DesignKnobs = field(default_factory=DesignKnobs)

    def scale(self, params: SystemParams) -> float:
        return params.c * self.w * params.alpha_R

    def to_dict(self) -> dict:
        d = asdict(self)
        d["diagnostics"]["w_interval"] = list(self.diagnostics.w_interval)
        return d


def eta_star(level: float, params: SystemParams) -> float:
    """Type-1 fraction at which the saturated fake-post attractor equals level * (1 - mu_a)."""
    return (1.0 - level) * (1.0 - params.mu_a) / (1.0 - params.alpha_F)


def f_threshold(theta: float, delta: float, params: SystemParams) -> float:
    delta_a = delta * (1.0 - params.mu_a)
    es = eta_star(theta, params)
    den = params.delta_R**params.a * (delta_a - params.alpha_R * es)
    if den == 0:
        raise BoundaryDegenerateError("delta_a == alpha_R * eta*_theta: boundary-degenerate configuration")
    return (delta_a - es * delta) / den


def kappa_Kdelta(delta: float, params: SystemParams) -> tuple[float, float]:
    Da = params.delta_R**params.a
    kappa = delta * (Da * (1.0 - params.alpha_F) - 1.0) - params.alpha_R * Da
    K = kappa**2 - 4.0 * delta * params.alpha_R * params.alpha_F * Da
    return kappa, K


def _quadratic_roots(delta, params):
    kappa, K = kappa_Kdelta(delta, params)
    Da = params.delta_R**params.a
    theta_2 = (-kappa + math.sqrt(K)) / (2.0 * Da * params.alpha_R) if K >= 0 else math.nan
    theta_star = 1.0 - delta * (1.0 - params.alpha_F) / params.alpha_R
    return kappa, K, theta_2, theta_star


def in_design_region(theta: float, delta: float, params: SystemParams) -> bool:
    """theta > f(theta, delta), or theta <= f with K_delta >= 0."""
    return theta > f_threshold(theta, delta, params) or kappa_Kdelta(delta, params)[1] >= 0


def theta_tilde(theta: float, delta: float, params: SystemParams, knobs: DesignKnobs = DesignKnobs()):
    """Detection level actually designed for; returns NotDesignable outside the design region."""
    if theta > f_threshold(theta, delta, params):
        return theta
    kappa, K, theta_2, theta_star = _quadratic_roots(delta, params)
    if K < 0:
        return NotDesignable(OUTSIDE_REGION, f"theta <= f(theta, delta) and K_delta = {K!r} < 0")
    needed = max(0.0, theta - theta_2)
    if knobs.eps == "auto":
        eps = needed + knobs.eps_margin
    else:
        eps = float(knobs.eps)
        if not eps > needed:
            raise KnobError(f"eps = {eps!r} must exceed {needed!r}")
    return min(max(theta_2, theta_star) + eps, 1.0)


def w_interval(theta_t: float, delta: float, params: SystemParams) -> tuple[float, float]:
    """Open interval for c * w * alpha_R that makes the design work."""
    mu_a = params.mu_a
    delta_a = delta * (1.0 - mu_a)
    es = eta_star(theta_t, params)
    lo = max(1.0, 1.0 / (params.delta_R**params.a * theta_t)) / (1.0 - mu_a)
    if not 1.0 - mu_a - es > 0:
        raise InfeasibleIntervalError(f"eta*_theta_tilde = {es!r} leaves no type-2 users")
    hi = min(1.0 / delta_a, (delta_a - es * params.alpha_R) / (delta_a * (1.0 - mu_a - es)))
    if not hi > lo:
        raise InfeasibleIntervalError(f"empty w-interval ({lo!r}, {hi!r})")
    return lo, hi


def eta_bar(scale: float, delta: float, params: SystemParams) -> float:
    delta_a = delta * (1.0 - params.mu_a)
    return delta_a * ((1.0 - params.mu_a) * scale - 1.0) / (scale * delta_a - params.alpha_R)


def gamma_lower(eta: float, params: SystemParams) -> float:
    s = eta + params.mu_a
    return (1.0 - s * (1.0 - params.p)) / ((1.0 - params.p) * (1.0 - s))


def reward(eta: float, gamma: float, params: SystemParams) -> float:
    return params.C_e * (1.0 - eta - params.mu_a + 1.0 / (gamma - 1.0))


def choose_design(theta: float, delta: float, params: SystemParams, knobs: DesignKnobs = DesignKnobs()):
    """Full design pipeline. Returns a MechanismDesign or a NotDesignable with a reason code.

    Raises KnobError when an explicit knob lies outside its admissible interval.
    """
    target = DesignTarget(theta, delta)
    report = validate_system(params, target)
    if not report.ok:
        return NotDesignable(HYPOTHESIS, str(report))
    try:
        f_value = f_threshold(theta, delta, params)
    except BoundaryDegenerateError as exc:
        return NotDesignable(HYPOTHESIS, str(exc))
    kappa, K, theta_2, theta_star = _quadratic_roots(delta, params)

    tt = theta_tilde(theta, delta, params, knobs)
    if isinstance(tt, NotDesignable):
        return tt
    if tt >= 1.0:
        return NotDesignable(THETA_TILDE_EDGE, "theta_tilde reached 1, leaving no room for eta")

    try:
        lo, hi = w_interval(tt, delta, params)
    except InfeasibleIntervalError as exc:
        return NotDesignable(HYPOTHESIS, str(exc))
    if knobs.eps1 == "midpoint":
        scale = 0.5 * (lo + hi)
    else:
        eps1 = float(knobs.eps1)
        if not 0 < eps1 < hi - lo:
            raise KnobError(f"eps1 = {eps1!r} must lie in (0, {hi - lo!r})")
        scale = lo + eps1
    w = scale / (params.c * params.alpha_R)

    e_bar = eta_bar(scale, delta, params)
    es = eta_star(tt, params)
    if not e_bar < es:
        return NotDesignable(HYPOTHESIS, f"eta_bar = {e_bar!r} >= eta*_theta_tilde = {es!r}")
    if knobs.eps2 == "midpoint":
        eta = e_bar + 0.5 * (es - e_bar)
    else:
        eps2 = float(knobs.eps2)
        if not 0 < eps2 <= es - e_bar:
            raise KnobError(f"eps2 = {eps2!r} must lie in (0, {es - e_bar!r}]")
        eta = e_bar + eps2

    g_low = gamma_lower(eta, params)
    gamma = (1.0 + knobs.gamma_margin) * g_low
    diag = DesignDiagnostics(
        f_value=f_value,
        kappa=kappa,
        K_delta=K,
        theta_2=theta_2,
        theta_star=theta_star,
        w_interval=(lo, hi),
        eta_bar=e_bar,
        eta_star_tilde=es,
        gamma_lower=g_low,
    )
    return MechanismDesign(
        theta_tilde=tt,
        w=w,
        eta=eta,
        gamma=gamma,
        R=reward(eta, gamma, params),
        diagnostics=diag,
        target=target,
        knobs=knobs,
    )
