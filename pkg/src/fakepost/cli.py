"""Command-line entry point.

Exit codes: 0 success, 1 internal error, 2 invalid input or failed
validation, 3 target not designable.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

from .attractor import attractor_closed_form
from .design import DesignKnobs, KnobError, NotDesignable, choose_design
from .equilibrium import ne_grid_scan, ne_set
from .experiments import SweepSpec, run_sweep
from .io import (
    ConfigError,
    design_bundle,
    dump_json,
    load_config,
    read_design_bundle,
    write_manifest,
)
from .model import PopulationProfile, PostType, participant_fractions, validate_system
from .tagging import RNG_NAME, convergence_report, simulate

log = logging.getLogger("fakepost")

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_NOT_DESIGNABLE = 0, 1, 2, 3


class CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _knob_overrides(args, knobs):
    changes = {}
    if getattr(args, "gamma_margin", None) is not None:
        changes["gamma_margin"] = args.gamma_margin
    if getattr(args, "eps_margin", None) is not None:
        changes["eps_margin"] = args.eps_margin
    if not changes:
        return knobs
    try:
        return DesignKnobs(**{**asdict(knobs), **changes})
    except KnobError as exc:
        raise CliFailure(EXIT_INVALID, str(exc))


def _design_from_config(args):
    params, target, knobs = load_config(args.config)
    knobs = _knob_overrides(args, knobs)
    report = validate_system(params, target)
    if not report.ok:
        raise CliFailure(EXIT_INVALID, f"validation {report}")
    try:
        design = choose_design(target.theta, target.delta, params, knobs)
    except KnobError as exc:
        raise CliFailure(EXIT_INVALID, str(exc))
    if isinstance(design, NotDesignable):
        raise CliFailure(EXIT_NOT_DESIGNABLE, f"not designable: {design.reason}: {design.detail}")
    return design, params


def _load_bundle(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read design bundle {path}: {exc}") from exc
    return read_design_bundle(doc)


def _resolve_design(args):
    if args.design:
        return _load_bundle(args.design)
    if not args.config:
        raise CliFailure(EXIT_INVALID, "one of --config or --design is required")
    return _design_from_config(args)


def _profile(args, design, params):
    given = [args.mu0, args.mu1, args.mu2]
    if all(v is None for v in given):
        return PopulationProfile.mixed(design.eta, params.mu_a)
    if any(v is None for v in given):
        raise CliFailure(EXIT_INVALID, "--mu0, --mu1 and --mu2 must be given together")
    mu = PopulationProfile(*given)
    try:
        mu.check(params.mu_a)
    except ValueError as exc:
        raise CliFailure(EXIT_INVALID, str(exc))
    return mu


def cmd_design(args):
    design, params = _design_from_config(args)
    bundle = design_bundle(design, params)
    text = dump_json(bundle, args.out)
    if args.out:
        write_manifest(args.out, "design", args.argv, {"config": str(args.config), **bundle})
    else:
        print(text)
    return EXIT_OK


def cmd_attractor(args):
    design, params = _resolve_design(args)
    mu = _profile(args, design, params)
    fr = participant_fractions(mu, params.mu_a)
    res = attractor_closed_form(PostType(args.post), fr, params, design.w)
    print(json.dumps({
        "post": args.post,
        "beta_star": res.beta_star,
        "regime": res.regime.value,
        "rho_bar": res.rho_bar,
        "rho": res.rho,
    }))
    return EXIT_OK


def cmd_simulate(args):
    design, params = _resolve_design(args)
    mu = _profile(args, design, params)
    fr = participant_fractions(mu, params.mu_a)
    u = PostType(args.post)
    traj = simulate(u, fr, params, design.w, args.epochs, args.seed)
    target = attractor_closed_form(u, fr, params, design.w).beta_star
    rep = convergence_report(traj, target, args.tol)
    traj.to_csv(args.out)
    summary = {
        "post": args.post,
        "epochs": args.epochs,
        "seed": args.seed,
        "rng": RNG_NAME,
        "profile": list(mu.as_tuple()),
        "final_beta": float(traj.betas[-1]),
        "fake_tag_count": traj.fake_tag_count,
        "attractor": target,
        "converged": rep.converged,
        "final_gap": rep.final_gap,
        "first_entry_epoch": None if math.isinf(rep.first_entry_epoch) else int(rep.first_entry_epoch),
    }
    resolved = {"config": args.config, "design": args.design, "params": asdict(params), "w": design.w, **summary}
    write_manifest(args.out, "simulate", args.argv, resolved, seeds=[args.seed])
    print(json.dumps(summary))
    return EXIT_OK


def _report_dict(report):
    d = asdict(report)
    for point in d["ne_list"]:
        point["profile"] = [point["profile"]["mu0"], point["profile"]["mu1"], point["profile"]["mu2"]]
    d["candidates"] = [
        {
            "profile": list(c.profile.as_tuple()),
            "refined": None if c.refined is None else list(c.refined.as_tuple()),
        }
        for c in report.candidates
    ]
    return d


def cmd_verify_ne(args):
    design, params = _load_bundle(args.design)
    report = ne_set(design, params)
    if args.grid_step is not None:
        report.candidates.extend(ne_grid_scan(design, params, args.grid_step))
    out = _report_dict(report)
    text = dump_json(out, args.out)
    if args.out:
        write_manifest(args.out, "verify-ne", args.argv, {"design": str(args.design), "grid_step": args.grid_step})
    else:
        print(text)
    return EXIT_OK


def cmd_sweep(args):
    knobs = _knob_overrides(args, DesignKnobs())
    try:
        spec = SweepSpec(args.d, args.n, args.seed, args.theta, knobs)
    except ValueError as exc:
        raise CliFailure(EXIT_INVALID, str(exc))
    summary = run_sweep(spec, workers=args.workers)
    summary.write_csv(args.out)
    write_manifest(args.out, "sweep", args.argv, summary.to_dict(), seeds=[args.seed])
    for row in summary.rows:
        log.info("d=%g designable=%.4f P<10%%=%.4f second_ne=%d", row.d, row.frac_designable, row.frac_P_lt_10, row.n_second_ne)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fakepost", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def knob_flags(p):
        p.add_argument("--gamma-margin", type=float, help="gamma = (1 + margin) * gamma_lower")
        p.add_argument("--eps-margin", type=float, help="theta-tilde increment above its minimum")

    def design_source(p):
        p.add_argument("--config")
        p.add_argument("--design", help="design bundle JSON (instead of --config)")
        knob_flags(p)

    def profile_flags(p):
        p.add_argument("--post", choices=["F", "R"], required=True)
        for name in ("mu0", "mu1", "mu2"):
            p.add_argument(f"--{name}", type=float)

    p = sub.add_parser("design", help="design a mechanism from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    knob_flags(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("attractor", help="limiting fake-tag fraction for a profile")
    design_source(p)
    profile_flags(p)
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("simulate", help="simulate the tagging chain")
    design_source(p)
    profile_flags(p)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-ne", help="equilibrium report for a design bundle")
    p.add_argument("--design", required=True)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_ne)

    p = sub.add_parser("sweep", help="Monte-Carlo feasibility / degradation sweep")
    p.add_argument("--theta", type=float, default=0.75)
    p.add_argument("--d", type=_float_list, required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    knob_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
