"""Config files, design bundles and run manifests."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import yaml

from . import __version__
from .design import DesignDiagnostics, DesignKnobs, MechanismDesign
from .model import DesignTarget, SystemParams

PARAM_KEYS = ("alpha_R", "alpha_F", "mu_a", "p", "a", "b", "c", "C_e", "Q_p", "Q_np")
TARGET_KEYS = ("theta", "delta")
KNOB_KEYS = ("eps", "eps_margin", "eps1", "eps2", "gamma_margin")


class ConfigError(ValueError):
    pass


def _flatten(doc, path=""):
    # sections may nest arbitrarily; only leaf names matter
    flat = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{path}{key}."))
        else:
            if key in flat:
                raise ConfigError(f"duplicate key {key!r}")
            flat[key] = value
    return flat


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {value!r}")
    return float(value)


def parse_config(doc) -> tuple[SystemParams, DesignTarget, DesignKnobs]:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    flat = _flatten(doc)
    for key in flat:
        if key not in PARAM_KEYS + TARGET_KEYS + KNOB_KEYS:
            raise ConfigError(f"unknown key {key!r}")
    for key in PARAM_KEYS + TARGET_KEYS:
        if key not in flat:
            raise ConfigError(f"missing key {key!r}")
    params = SystemParams(**{k: _number(k, flat[k]) for k in PARAM_KEYS})
    target = DesignTarget(**{k: _number(k, flat[k]) for k in TARGET_KEYS})
    knob_args = {}
    for k in KNOB_KEYS:
        if k in flat:
            v = flat[k]
            knob_args[k] = v if isinstance(v, str) else _number(k, v)
    try:
        knobs = DesignKnobs(**knob_args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return params, target, knobs


def load_config(path) -> tuple[SystemParams, DesignTarget, DesignKnobs]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(doc)


def params_hash(params: SystemParams, target: DesignTarget) -> str:
    blob = json.dumps({"params": asdict(params), "target": asdict(target)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def design_bundle(design: MechanismDesign, params: SystemParams) -> dict:
    d = design.to_dict()
    return {
        "tool": "fakepost",
        "version": __version__,
        "params": asdict(params),
        "target": d.pop("target"),
        "knobs": d.pop("knobs"),
        "design": d,
        "params_hash": params_hash(params, design.target),
    }


def read_design_bundle(doc: dict) -> tuple[MechanismDesign, SystemParams]:
    """Rebuild (design, params) from a bundle, refusing inconsistent parameters."""
    try:
        params = SystemParams(**doc["params"])
        target = DesignTarget(**doc["target"])
        knobs = DesignKnobs(**doc["knobs"])
        body = dict(doc["design"])
        diag = dict(body.pop("diagnostics"))
        diag["w_interval"] = tuple(diag["w_interval"])
        design = MechanismDesign(**body, diagnostics=DesignDiagnostics(**diag), target=target, knobs=knobs)
        stored = doc["params_hash"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed design bundle: {exc}") from exc
    if stored != params_hash(params, target):
        raise ConfigError("design bundle params_hash does not match its embedded parameters")
    return design, params


def dump_json(obj, path=None) -> str:
    # json writes floats with repr(), the shortest string that round-trips bit-exactly
    text = json.dumps(obj, indent=2, allow_nan=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def write_manifest(out_path, subcommand: str, argv, resolved: dict, seeds=None, extra_outputs=()) -> Path:
    manifest = {
        "subcommand": subcommand,
        "argv": list(argv),
        "tool_version": __version__,
        "resolved": resolved,
        "seeds": seeds,
        "outputs": [str(out_path), *map(str, extra_outputs)],
    }
    path = Path(str(out_path) + ".manifest.json")
    dump_json(manifest, path)
    return path
