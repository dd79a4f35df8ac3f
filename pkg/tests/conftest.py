import sys
from pathlib import Path

import numpy as np
import pytest

from fakepost.design import DesignKnobs, MechanismDesign, choose_design, kappa_Kdelta
from fakepost.model import DesignTarget, SystemParams, validate_system

sys.path.insert(0, str(Path(__file__).parent))

# Worked example used throughout; expected values below were produced by
# oracles.design_pipeline at 40 digits and frozen.
C0_PARAMS = SystemParams(alpha_R=0.27, alpha_F=0.30, mu_a=0.1, p=0.3, a=2.0, b=1.0, c=1.0, C_e=1.0, Q_p=1.0, Q_np=0.5)
C0_TARGET = DesignTarget(theta=0.75, delta=0.28)

C0 = {
    "f": 0.79424124513618677,
    "kappa": -0.37135802469135802,
    "K_delta": 0.025906782502667276,
    "theta_2": 0.79847079737515001,
    "theta_star": 0.27407407407407407,
    "theta_tilde": 0.79947079737515001,
    "eta_star_tilde": 0.25782326051766428,
    "w_lo": 1.1257446838019737,
    "w_hi": 1.1270429895762535,
    "scale": 1.1263938366891136,
    "w": 4.1718290247744947,
    "eta_bar": 0.25023900012133873,
    "eta": 0.2540311303195015,
    "gamma_lower": 1.6634552355183981,
    "gamma": 1.9961462826220778,
    "R": 1.6498374956495463,
    "x_eta": 0.7489823790143654,
    "beta_F_eta": 0.72217820877634895,
    "beta_R_eta": 0.25180716339147316,
    "beta_F_x": 0.28442605178742297,
    "beta_R_x": 0.24367578995330571,
    "P": 57.862807142604005,
    "x_F": 0.25841564517473317,
    "utility_at_ne": 2.0038686259690478,
}


@pytest.fixture
def c0_params():
    return C0_PARAMS


@pytest.fixture
def c0_target():
    return C0_TARGET


@pytest.fixture(scope="session")
def c0_design() -> MechanismDesign:
    d = choose_design(C0_TARGET.theta, C0_TARGET.delta, C0_PARAMS)
    assert isinstance(d, MechanismDesign)
    return d


def random_design_configs(n, seed=12345, require_k=True):
    """Random (params, target) pairs satisfying every standing hypothesis.

    With ``require_k`` only configurations inside the design region are kept.
    Draws are broader than the Monte-Carlo study so the design properties get exercised
    away from its sampling box.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        alpha_R = rng.uniform(0.05, 0.6)
        alpha_F = rng.uniform(alpha_R * 1.005, min(0.95, alpha_R * 2.5))
        mu_a = rng.uniform(0.0, 0.3)
        a = rng.uniform(0.5, 3.5)
        delta = rng.uniform(alpha_R, min(0.95, alpha_R + 0.2))
        Da = (alpha_F / alpha_R) ** a
        floor = max(alpha_F, delta / Da, delta)
        if floor >= 1:
            continue
        theta = rng.uniform(floor, 1.0)
        params = SystemParams(
            alpha_R=alpha_R, alpha_F=alpha_F, mu_a=mu_a, p=rng.uniform(0.01, 0.99), a=a,
            b=rng.uniform(0.5, 3), c=rng.uniform(0.2, 5), C_e=rng.uniform(0.1, 3),
            Q_p=1.0, Q_np=rng.uniform(-1, 1),
        )
        target = DesignTarget(theta, delta)
        if not validate_system(params, target).ok:
            continue
        if require_k and kappa_Kdelta(delta, params)[1] < 0:
            continue
        out.append((params, target))
    return out


@pytest.fixture(scope="session")
def random_configs():
    return random_design_configs(10_000)


@pytest.fixture(scope="session")
def random_designs(random_configs):
    """(params, target, design) for every random config that the pipeline accepts."""
    out = []
    for params, target in random_configs:
        d = choose_design(target.theta, target.delta, params, DesignKnobs())
        out.append((params, target, d))
    return out
