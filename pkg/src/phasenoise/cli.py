"""Command-line front end.

Every subcommand reads an optional JSON config file, applies flag overrides,
validates the merged config against a JSON schema and writes its result
(CSV or JSON) plus a run manifest.  Angles are given in degrees and SNR in
dB with the noise-variance-2 convention: rho = 10^(snr_db / 10) and
E|x|^2 <= 2 rho.

Exit codes: 0 success, 2 config error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np
import scipy

from . import __version__, circular
from .capacity import LN2, ChannelSpec, EstimatorConfig, SnrSpec, parse_gains, phase_noise_number
from .channel import EstimatorError, distributional_suite, rate_lb_noncoherent_mc
from .circular import DEFAULT_NODES, WrappedGaussian, gaussian_entropy
from .models import model_from_dict
from .outage import BoundedChiError, OutageTemplate, gap_vs_M, outage_cdf_mc
from .streams import substream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3

COMMANDS = ("entropy-curve", "pnn", "outage", "gap", "rate-lb", "validate")

DEFAULTS: dict[str, dict[str, Any]] = {
    "entropy-curve": {"sigma_min_deg": 1.0, "sigma_max_deg": 180.0, "steps": 180, "format": "csv"},
    "pnn": {
        "direction": "uplink",
        "topology": "clo",
        "model": {"kind": "noncoherent"},
        "h": [1.0],
        "seed": 0,
        "n_samples": 20_000,
        "lower": "innovation_mc",
        "entropy_method": "auto",
        "format": "json",
    },
    "outage": {
        "direction": "downlink",
        "topology": "clo",
        "model": {"kind": "wiener", "sigma_deg": 6.0},
        "M": 20,
        "h": "rayleigh",
        "snr_db": 20.0,
        "seed": 0,
        "n_samples": 1_000_000,
        "rate_min_bits": 4.0,
        "rate_max_bits": 12.0,
        "rate_steps": 161,
        "format": "csv",
    },
    "gap": {
        "epsilon": 0.1,
        "M_list": [1, 2, 5, 10, 20, 50, 100],
        "sigmas_deg": [6.0, 2.0],
        "snr_db": 20.0,
        "seed": 0,
        "n_samples": 200_000,
        "format": "csv",
    },
    "rate-lb": {"h": [1.0, 1.0], "snr_db": 40.0, "seed": 0, "n_samples": 1_000_000, "format": "json"},
    "validate": {"seed": 0, "n_samples": 20_000, "format": "csv"},
}

_ANGLE = {"type": "number", "exclusiveMinimum": 0}
_GAIN = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        {"type": "object", "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
         "additionalProperties": False},
    ]
}
_CIRCULAR = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["uniform", "wrapped_gaussian", "tikhonov"]},
        "sigma_deg": _ANGLE,
        "lambda": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}
_MODEL = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["noncoherent", "partially_coherent", "tikhonov", "wiener", "composite_wiener"]},
        "sigma_deg": _ANGLE,
        "lambda": {"type": "number", "minimum": 0},
        "residual": _CIRCULAR,
        "sigma_tx_deg": {"type": "number", "minimum": 0},
        "sigma_rx_deg": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "wiener"}}}, "then": {"required": ["sigma_deg"]}},
        {"if": {"properties": {"kind": {"const": "tikhonov"}}}, "then": {"required": ["lambda"]}},
        {"if": {"properties": {"kind": {"const": "partially_coherent"}}}, "then": {"required": ["residual"]}},
        {"if": {"properties": {"kind": {"const": "composite_wiener"}}},
         "then": {"required": ["sigma_tx_deg", "sigma_rx_deg"]}},
    ],
}

SCHEMA = {
    "type": "object",
    "required": ["command", "format"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "model": _MODEL,
        "direction": {"enum": ["uplink", "downlink"]},
        "topology": {"enum": ["clo", "slo"]},
        "M": {"type": "integer", "minimum": 1},
        "h": {"oneOf": [{"const": "rayleigh"}, {"type": "array", "items": _GAIN, "minItems": 1}]},
        "snr_db": {"type": "number"},
        "seed": {"type": "integer", "minimum": 0},
        "n_samples": {"type": "integer", "minimum": 2},
        "workers": {"type": "integer", "minimum": 1},
        "output": {"type": ["string", "null"]},
        "manifest": {"type": ["string", "null"]},
        "format": {"enum": ["csv", "json"]},
        "sigma_min_deg": _ANGLE,
        "sigma_max_deg": _ANGLE,
        "steps": {"type": "integer", "minimum": 2},
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "M_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "sigmas_deg": {"type": "array", "items": _ANGLE, "minItems": 2, "maxItems": 2},
        "rate_min_bits": {"type": "number"},
        "rate_max_bits": {"type": "number"},
        "rate_steps": {"type": "integer", "minimum": 1},
        "lower": {"enum": ["innovation_mc", "chain"]},
        "entropy_method": {"enum": ["auto", "quadrature", "series", "gaussian_approx", "closed_form"]},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


# --- config handling -------------------------------------------------------------


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings such as "rayleigh"


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasenoise",
        description="High-SNR capacity of SIMO/MISO phase-noise channels (rates in bits per channel use).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file; flags override its fields")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--manifest", help="manifest file (default: <output>.manifest.json, or stderr)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--seed", type=int)
        p.add_argument("--n-samples", dest="n_samples", type=int)
        p.add_argument("--workers", type=int)
        if name in ("pnn", "outage"):
            p.add_argument("--model", type=_json_arg, help='JSON descriptor, e.g. \'{"kind":"wiener","sigma_deg":6}\'')
            p.add_argument("--direction", choices=["uplink", "downlink"])
            p.add_argument("--topology", choices=["clo", "slo"])
            p.add_argument("--entropy-method", dest="entropy_method")
        if name in ("pnn", "outage", "rate-lb"):
            p.add_argument("--h", type=_json_arg, help='JSON list of gains or "rayleigh"')
            p.add_argument("--M", type=int)
        if name in ("outage", "gap", "rate-lb"):
            p.add_argument("--snr-db", dest="snr_db", type=float)
        if name == "entropy-curve":
            p.add_argument("--sigma-min-deg", dest="sigma_min_deg", type=float)
            p.add_argument("--sigma-max-deg", dest="sigma_max_deg", type=float)
            p.add_argument("--steps", type=int)
        if name == "pnn":
            p.add_argument("--lower", choices=["innovation_mc", "chain"])
        if name == "outage":
            p.add_argument("--rate-min-bits", dest="rate_min_bits", type=float)
            p.add_argument("--rate-max-bits", dest="rate_max_bits", type=float)
            p.add_argument("--rate-steps", dest="rate_steps", type=int)
        if name == "gap":
            p.add_argument("--epsilon", type=float)
            p.add_argument("--M-list", dest="M_list", type=_int_list)
            p.add_argument("--sigmas-deg", dest="sigmas_deg", type=_float_list)
    return parser


def _path(error: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in error.absolute_path) or "<root>"


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags; validated."""
    cfg = dict(DEFAULTS[args.command])
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        if loaded.get("command", args.command) != args.command:
            raise ConfigError(f"command: config is for {loaded['command']!r}, not {args.command!r}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            cfg[key] = value
    cfg["command"] = args.command

    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(f"{_path(e)}: {e.message}" for e in errors))
    _check_semantics(cfg)
    return cfg


def _check_semantics(cfg: dict) -> None:
    cmd = cfg["command"]
    if cmd == "entropy-curve" and not cfg["sigma_min_deg"] < cfg["sigma_max_deg"]:
        raise ConfigError("sigma_max_deg: must exceed sigma_min_deg")
    if cmd == "outage" and cfg["rate_max_bits"] < cfg["rate_min_bits"]:
        raise ConfigError("rate_max_bits: must not be below rate_min_bits")
    if cmd == "outage" and cfg.get("h") != "rayleigh":
        raise ConfigError("h: outage curves need the Rayleigh ensemble, use \"rayleigh\"")
    if cmd in ("pnn", "rate-lb") and cfg.get("h") == "rayleigh" and "M" not in cfg:
        raise ConfigError("M: required when h is \"rayleigh\"")
    if cmd in ("pnn", "rate-lb") and isinstance(cfg.get("h"), list) and "M" in cfg and len(cfg["h"]) != cfg["M"]:
        raise ConfigError(f"M: {cfg['M']} disagrees with the {len(cfg['h'])} gains in h")
    if cmd in ("pnn", "rate-lb") and cfg["format"] != "json":
        raise ConfigError(f"format: {cmd} only writes json")
    if "model" in cfg:
        try:
            model_from_dict(cfg["model"])
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from exc


def config_hash(cfg: dict) -> str:
    # output locations do not change results
    body = {k: v for k, v in cfg.items() if k not in ("output", "manifest", "workers")}
    return hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def manifest(cfg: dict) -> dict:
    return {
        "tool": "phasenoise",
        "version": __version__,
        "command": cfg["command"],
        "seed": cfg.get("seed"),
        "config_sha256": config_hash(cfg),
        "config": cfg,
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
    }


# --- output ----------------------------------------------------------------------


def _num(v) -> Any:
    v = float(v)
    return v if math.isfinite(v) else None


def render_table(header: list[str], rows: list[list[float]], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _num(v) if not isinstance(v, (int, str, bool)) else v for k, v in zip(header, r)}
                           for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([v if isinstance(v, (int, str, bool)) else repr(float(v)) for v in r])
    return buf.getvalue()


def render_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --- subcommands -----------------------------------------------------------------


def _gains(cfg: dict) -> np.ndarray:
    if cfg["h"] == "rayleigh":
        rng = substream(cfg["seed"], "cli-gains")
        M = cfg["M"]
        return (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / math.sqrt(2.0)
    return parse_gains(cfg["h"])


def _quadrature_nodes(sigma: float) -> int:
    nodes = DEFAULT_NODES
    while sigma < 8.0 * circular.TWO_PI / nodes:
        nodes *= 2
    return nodes


def cmd_entropy_curve(cfg: dict) -> tuple[str, int]:
    sigmas = np.linspace(cfg["sigma_min_deg"], cfg["sigma_max_deg"], cfg["steps"])
    rows = []
    for deg in sigmas:
        s = math.radians(deg)
        wrapped = circular.entropy(WrappedGaussian(s), "quadrature", _quadrature_nodes(s)).value / LN2
        unwrapped = gaussian_entropy(s) / LN2
        rows.append([float(deg), wrapped, unwrapped, abs(wrapped - unwrapped)])
    header = ["sigma_deg", "h_wrapped_bits", "h_unwrapped_bits", "abs_diff_bits"]
    return render_table(header, rows, cfg["format"]), EXIT_OK


def cmd_pnn(cfg: dict) -> tuple[str, int]:
    spec = ChannelSpec(cfg["direction"], cfg["topology"], _gains(cfg), model_from_dict(cfg["model"]))
    est = EstimatorConfig(n_samples=cfg["n_samples"], seed=cfg["seed"], workers=cfg.get("workers", 1))
    kwargs: dict[str, Any] = {"entropy_method": cfg["entropy_method"]}
    if spec.direction.value == "uplink" and spec.topology.value == "slo":
        kwargs.update(lower=cfg["lower"], estimator=est)
    return render_json(phase_noise_number(spec, **kwargs).to_dict()), EXIT_OK


def cmd_outage(cfg: dict) -> tuple[str, int]:
    template = OutageTemplate(cfg["direction"], cfg["topology"], cfg["M"], model_from_dict(cfg["model"]))
    grid = np.linspace(cfg["rate_min_bits"], cfg["rate_max_bits"], cfg["rate_steps"])
    curve = outage_cdf_mc(
        template, SnrSpec.from_db(cfg["snr_db"]), grid, cfg["n_samples"], cfg["seed"],
        workers=cfg.get("workers", 1), entropy_method=cfg.get("entropy_method", "auto"),
    )
    rows = [[r, p, c] for r, p, c in zip(curve.rate_grid, curve.probabilities, curve.ci_halfwidth)]
    return render_table(["rate_bits", "prob", "ci"], rows, cfg["format"]), EXIT_OK


def cmd_gap(cfg: dict) -> tuple[str, int]:
    table = gap_vs_M(
        cfg["epsilon"], cfg["M_list"], sigmas_deg=tuple(cfg["sigmas_deg"]), snr=SnrSpec.from_db(cfg["snr_db"]),
        n_samples=cfg["n_samples"], seed=cfg["seed"], workers=cfg.get("workers", 1),
    )
    header = ["M", "delta_R_analytic_bits", "delta_R_mc_bits", "ci_bits", "delta_R_mc_alt_bits", "ci_alt_bits"]
    rows = [[r.M, r.delta_r_analytic, r.delta_r_mc, r.ci, r.delta_r_mc_alt, r.ci_alt] for r in table]
    return render_table(header, rows, cfg["format"]), EXIT_OK


def cmd_rate_lb(cfg: dict) -> tuple[str, int]:
    snr = SnrSpec.from_db(cfg["snr_db"])
    est = rate_lb_noncoherent_mc(_gains(cfg), snr, cfg["n_samples"], cfg["seed"], workers=cfg.get("workers", 1))
    out = {
        "rate_nats": est.value,
        "std_error_nats": est.std_error,
        "h_t_nats": est.h_t,
        "h_t_given_x_nats": est.h_t_given_x,
        "asymptote_nats": est.asymptote,
        "rate_bits": est.value / LN2,
        "asymptote_bits": est.asymptote / LN2,
    }
    return render_json({k: round(v, 12) + 0.0 for k, v in out.items()}), EXIT_OK


def cmd_validate(cfg: dict) -> tuple[str, int]:
    results = distributional_suite(cfg["seed"], cfg["n_samples"])
    rows = [[r.name, r.statistic, r.p_value, r.passed] for r in results]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION
    return render_table(["test", "statistic", "p_value", "passed"], rows, cfg["format"]), code


HANDLERS = {
    "entropy-curve": cmd_entropy_curve,
    "pnn": cmd_pnn,
    "outage": cmd_outage,
    "gap": cmd_gap,
    "rate-lb": cmd_rate_lb,
    "validate": cmd_validate,
}


def run(argv: Optional[list[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        text, code = HANDLERS[cfg["command"]](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (BoundedChiError, EstimatorError, ValueError) as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG

    man = render_json(manifest(cfg))
    if cfg.get("output"):
        Path(cfg["output"]).write_text(text)
        Path(cfg.get("manifest") or cfg["output"] + ".manifest.json").write_text(man)
    else:
        stdout.write(text)
        if cfg.get("manifest"):
            Path(cfg["manifest"]).write_text(man)
        else:
            stderr.write(man)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
