"""Monte-Carlo simulation of the embedded tagging chain.

At every epoch one participant arrives: adversarial with probability eta_a,
type 1 with probability eta, type 2 otherwise.  Adversaries never tag a post
as fake, type-1 users tag fake with probability alpha_u, and type-2 users with
the warning-modulated probability min{m_u * beta_k, 1} where beta_k is the
fake-tag fraction before their own tag.

Random numbers come from numpy's Philox (counter-based) bit generator seeded
with the user seed; two uniforms are consumed per epoch, the first picking the
participant type and the second deciding the tag.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import ParticipantFractions, PostType, SystemParams, effective_slope

RNG_NAME = "numpy.random.Philox"

ADVERSARY, TYPE1, TYPE2 = 0, 1, 2
_TYPE_LABELS = {ADVERSARY: "a", TYPE1: "1", TYPE2: "2"}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class TagTrajectory:
    post_type: PostType
    seed: int
    betas: np.ndarray  # beta_{u,k} for k = 1..K
    participant_types: np.ndarray  # int8 codes ADVERSARY / TYPE1 / TYPE2
    tags: np.ndarray  # True where the tag was "fake"
    fake_tag_count: int
    fractions: ParticipantFractions
    params: SystemParams
    w: float
    beta0: float = 0.0

    @property
    def epochs(self) -> int:
        return len(self.betas)

    def fake_counts(self) -> np.ndarray:
        return np.cumsum(self.tags, dtype=np.int64)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "beta", "participant_type", "tag"])
            for k, (beta, ptype, tag) in enumerate(
                zip(self.betas.tolist(), self.participant_types.tolist(), self.tags.tolist()), start=1
            ):
                writer.writerow([k, repr(beta), _TYPE_LABELS[ptype], "F" if tag else "R"])


def simulate(
    u: PostType,
    fr: ParticipantFractions,
    params: SystemParams,
    w: float,
    K: int,
    seed: int,
    beta0: float = 0.0,
) -> TagTrajectory:
    """Run K epochs of the tagging chain for a ``u``-post.

    ``beta0`` is the fraction seen by a type-2 user arriving first; from the
    second epoch on beta_k = X_k / k.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if fr.eta < 0 or fr.eta_a < 0 or fr.eta + fr.eta_a > 1 + 1e-12:
        raise ValueError(f"invalid participant fractions {fr}")
    rng = make_rng(seed)
    draws = rng.random((K, 2))
    pick, coin = draws[:, 0], draws[:, 1]

    types = np.full(K, TYPE2, dtype=np.int8)
    types[pick < fr.eta_a + fr.eta] = TYPE1
    types[pick < fr.eta_a] = ADVERSARY

    alpha_u = params.capacity(u)
    m = effective_slope(u, params, w)
    # tags of adversaries and type-1 users do not depend on the running fraction
    fixed = (types == TYPE1) & (coin < alpha_u)

    is2 = (types == TYPE2).tolist()
    coin_l = coin.tolist()
    fixed_l = fixed.tolist()
    tags = [False] * K
    betas = [0.0] * K
    x = 0
    beta = beta0
    for k in range(K):
        if is2[k]:
            tag = coin_l[k] < min(m * beta, 1.0)
        else:
            tag = fixed_l[k]
        if tag:
            x += 1
            tags[k] = True
        beta = x / (k + 1)
        betas[k] = beta

    return TagTrajectory(
        post_type=u,
        seed=seed,
        betas=np.array(betas),
        participant_types=types,
        tags=np.array(tags, dtype=bool),
        fake_tag_count=x,
        fractions=fr,
        params=params,
        w=w,
        beta0=beta0,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    final_gap: float
    first_entry_epoch: float  # 1-based epoch, math.inf if never


def convergence_report(traj, target: float, tol: float) -> ConvergenceReport:
    """Compare the trajectory's tail against a target limit.

    ``first_entry_epoch`` is the first epoch from which the trajectory is
    within ``tol`` and never again leaves the ``2 * tol`` band.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    betas = traj.betas if hasattr(traj, "betas") else np.asarray(traj, dtype=float)
    gaps = np.abs(betas - target)
    final_gap = float(gaps[-1])
    outside = np.flatnonzero(gaps >= 2 * tol)
    start = outside[-1] + 1 if outside.size else 0
    inside = np.flatnonzero(gaps[start:] < tol)
    entry = float(start + inside[0] + 1) if inside.size else math.inf
    return ConvergenceReport(final_gap < tol, final_gap, entry)
