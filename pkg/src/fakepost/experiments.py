"""Monte-Carlo feasibility / degradation study over random configurations.

Sample ``i`` is drawn from its own Philox stream keyed by (master_seed, i),
so the same four uniforms are reused for every capacity gap ``d``; only
alpha_F changes with ``d``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .design import BoundaryDegenerateError, DesignKnobs, NotDesignable, choose_design, in_design_region
from .equilibrium import ne_set
from .model import DesignTarget, SystemParams

P_THRESHOLD = 10.0
CSV_HEADER = ["d", "n", "frac_designable", "frac_P_lt_10", "mean_P", "n_second_ne", "master_seed"]
P_DENOMINATOR = "designable (samples without a second equilibrium count as P = 0)"


@dataclass(frozen=True)
class SweepSpec:
    d_values: tuple[float, ...]
    n_samples: int
    master_seed: int
    theta: float = 0.75
    knobs: DesignKnobs = field(default_factory=DesignKnobs)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not all(0 < d < 1 for d in self.d_values):
            raise ValueError("every d must lie in (0, 1)")


@dataclass(frozen=True)
class SweepRow:
    d: float
    n: int
    frac_designable: float
    frac_region_ai: float  # (theta, delta) in the design region, hypotheses ignored
    frac_P_lt_10: float
    frac_P_lt_10_given_second_ne: float
    mean_P: float  # over samples with a second equilibrium; nan if none
    n_second_ne: int
    n_failed: int
    not_designable_reasons: dict
    P_denominator: str = P_DENOMINATOR


@dataclass(frozen=True)
class SweepSummary:
    rows: list[SweepRow]
    master_seed: int
    theta: float
    knobs: DesignKnobs

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "theta": self.theta,
            "knobs": asdict(self.knobs),
            "rows": [asdict(r) for r in self.rows],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in self.rows:
                writer.writerow(
                    [repr(r.d), r.n, repr(r.frac_designable), repr(r.frac_P_lt_10), repr(r.mean_P), r.n_second_ne, self.master_seed]
                )


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, index])))


def sample_config(d: float, rng: np.random.Generator, theta: float = 0.75) -> tuple[SystemParams, DesignTarget]:
    if not 0 < d < 1:
        raise ValueError("d must lie in (0, 1)")
    alpha_R = rng.uniform(0.25, 0.3)
    mu_a = rng.uniform(0.0, 0.2)
    a = rng.uniform(2.0, 3.0)
    p = rng.uniform(0.0, 0.5)
    params = SystemParams(
        alpha_R=float(alpha_R),
        alpha_F=float(alpha_R / (1.0 - d)),
        mu_a=float(mu_a),
        p=float(p),
        a=float(a),
        b=1.0,
        c=1.0,
        C_e=1.0,
        Q_p=1.0,
        Q_np=0.5,
    )
    return params, DesignTarget(theta, float(alpha_R + 0.01))


def evaluate_sample(d, index, spec):
    """Outcome of one configuration: (region_ok, design_ok, second_ne, P, reason)."""
    params, target = sample_config(d, sample_rng(spec.master_seed, index), spec.theta)
    try:
        region = in_design_region(target.theta, target.delta, params)
    except BoundaryDegenerateError:
        region = False
    design = choose_design(target.theta, target.delta, params, spec.knobs)
    if isinstance(design, NotDesignable):
        return region, False, False, math.nan, design.reason
    report = ne_set(design, params)
    P = report.degradation_P if report.second_ne_exists else math.nan
    return region, True, report.second_ne_exists, P, None


def _run_d(args):
    d, spec = args
    n = spec.n_samples
    n_region = n_design = n_second = n_lt = n_failed = 0
    p_sum = 0.0
    reasons: dict = {}
    for i in range(n):
        try:
            region, ok, second, P, reason = evaluate_sample(d, i, spec)
        except Exception:  # counted, never dropped silently
            n_failed += 1
            continue
        n_region += region
        if not ok:
            reasons[reason] = reasons.get(reason, 0) + 1
            continue
        n_design += 1
        if second:
            n_second += 1
            p_sum += P
            n_lt += P < P_THRESHOLD
        else:
            n_lt += 1
    n_lt_given = n_lt - (n_design - n_second)
    return SweepRow(
        d=d,
        n=n,
        frac_designable=n_design / n,
        frac_region_ai=n_region / n,
        frac_P_lt_10=n_lt / n_design if n_design else math.nan,
        frac_P_lt_10_given_second_ne=n_lt_given / n_second if n_second else math.nan,
        mean_P=p_sum / n_second if n_second else math.nan,
        n_second_ne=n_second,
        n_failed=n_failed,
        not_designable_reasons=dict(sorted(reasons.items())),
    )


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepSummary:
    jobs = [(float(d), spec) for d in spec.d_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_d, jobs))
    else:
        rows = [_run_d(j) for j in jobs]
    return SweepSummary(rows=rows, master_seed=spec.master_seed, theta=spec.theta, knobs=spec.knobs)
