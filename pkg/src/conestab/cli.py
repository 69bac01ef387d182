"""Command-line front end.

    conestab classify | sweep | calibration | variation-decay | forms
        [--config PATH] [--seed N] [--out DIR] [--tol X] [--grid N]

Exit codes: 0 pass, 1 usage or config error, 2 unsupported input,
3 tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .calibrations import CONE_CATALOG, calibration_test, spec_from_json
from .coneforms import (
    FourierTorus,
    UnsupportedOperation,
    critical_oneform_obstruction,
    hodge_psd_check,
    neg1_ledger,
)
from .io import write_csv, write_json
from .links import UnsupportedLink, link_from_json
from .spectral import classify, lawson_sweep
from .variations import HolomorphicPolynomial, rayleigh_decay

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_TOLERANCE = 0, 1, 2, 3

SWEEP_COLUMNS = ["n", "k", "l", "mu1", "d0", "verdict"]
VARIATION_COLUMNS = ["N", "Q", "bound", "weighted_norm", "rayleigh"]

DEFAULTS = {
    "classify": {
        "link": {"type": "ProductOfSpheres", "k": 3, "l": 3},
        "eps": [math.exp(-math.pi), math.exp(-2.0), 0.01],
        "grid": 256,
        "tol": 1e-2,
    },
    "sweep": {"n_min": 2, "n_max": 10, "tol": 0.0},
    "calibration": {"cone": "lawson-osserman", "form": None, "samples": 1000, "chart": 0, "tol": 1e-8},
    "variation-decay": {
        "polynomial": {"type": "quadric"},
        "N": [4, 8, 16, 32],
        "direct_N": [],
        "grid": 12,
        "K_samples": 10000,
        "tol": 1e-2,
    },
    "forms": {"link": {"d": 3, "kappa": 8}, "n": [4, 5, 6, 8], "grid": None, "tol": 1e-10},
}


class ConfigError(ValueError):
    pass


def resolve_config(command: str, args) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS[command]))
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(loaded) - set(cfg) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(loaded)
    cfg["seed"] = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    if args.tol is not None:
        cfg["tol"] = float(args.tol)
    if args.grid is not None:
        cfg["grid"] = int(args.grid)
    return cfg


def provenance(command: str, cfg: dict) -> dict:
    return {"command": command, "version": __version__, "seed": cfg["seed"], "tolerances": {"tol": cfg["tol"]}, "config": cfg}


# --- commands ---------------------------------------------------------------------


def cmd_classify(cfg: dict, out: Path) -> int:
    try:
        spec = link_from_json(cfg["link"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UnsupportedLink):
            raise
        raise ConfigError(f"bad link spec: {exc}") from exc
    report = classify(spec, tuple(cfg["eps"]), int(cfg["grid"]), cfg["seed"])
    doc = report.to_json()
    ok = doc["residuals"]["max_lambda1_rel_err"] <= cfg["tol"]
    doc["passed"] = ok
    doc["provenance"] = provenance("classify", cfg)
    write_json(out / "classify.json", doc)
    print(f"n={doc['n']} mu1={doc['mu1']:g} d0={doc['d0']:g} verdict={doc['verdict']}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_sweep(cfg: dict, out: Path) -> int:
    lo, hi = int(cfg["n_min"]), int(cfg["n_max"])
    try:
        rows = lawson_sweep(range(lo, hi + 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    write_json(out / "sweep.json", {"rows": rows, "provenance": provenance("sweep", cfg)})
    print(f"{len(rows)} rows written to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_calibration(cfg: dict, out: Path) -> int:
    if cfg["cone"] not in CONE_CATALOG:
        raise UnsupportedLink(f"unknown cone {cfg['cone']!r}; choose from {sorted(CONE_CATALOG)}")
    form = None
    if cfg.get("form"):
        try:
            form = spec_from_json(cfg["form"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad form spec: {exc}") from exc
    report = calibration_test(cfg["cone"], form, int(cfg["samples"]), cfg["seed"], float(cfg["tol"]), int(cfg["chart"]))
    doc = report.to_json()
    doc["provenance"] = provenance("calibration", cfg)
    write_json(out / "calibration.json", doc)
    print(
        f"{report.cone}: restriction {report.max_restriction_residual:.3e}, "
        f"value {report.max_value_residual:.3e}, {'pass' if report.passed else 'FAIL'}"
    )
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def cmd_variation_decay(cfg: dict, out: Path) -> int:
    try:
        f = HolomorphicPolynomial.from_json(cfg["polynomial"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad polynomial: {exc}") from exc
    report = rayleigh_decay(
        f,
        [float(n) for n in cfg["N"]],
        resolution=int(cfg["grid"]),
        seed=cfg["seed"],
        K_samples=int(cfg["K_samples"]),
        direct_N=[float(n) for n in cfg["direct_N"]],
    )
    doc = report.to_json()
    rows = doc["rows"]
    bound_ok = all(r["Q"] <= r["bound"] * (1 + cfg["tol"]) for r in rows)
    decreasing = all(b["rayleigh"] < a["rayleigh"] for a, b in zip(rows, rows[1:]))
    direct_ok = all(v["rel_diff"] <= 0.02 for v in doc["direct"].values())
    doc["checks"] = {"bound": bound_ok, "decreasing": decreasing, "direct_agreement": direct_ok}
    doc["provenance"] = provenance("variation-decay", cfg)
    write_json(out / "variation.json", doc)
    write_csv(out / "variation.csv", VARIATION_COLUMNS, rows)
    for r in rows:
        print(f"N={r['N']:g} Q={r['Q']:.6g} bound={r['bound']:.6g} rayleigh={r['rayleigh']:.6g}")
    return EXIT_OK if bound_ok and decreasing and direct_ok else EXIT_TOLERANCE


def cmd_forms(cfg: dict, out: Path) -> int:
    try:
        link = FourierTorus(int(cfg["link"].get("d", 3)), int(cfg["grid"] or cfg["link"].get("kappa", 8)))
    except (AttributeError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad link: {exc}") from exc
    reports = [critical_oneform_obstruction(link, int(n)).to_json() for n in cfg["n"]]
    hodge = [hodge_psd_check(link, p).to_json() for p in range(link.d + 1)]
    doc = {"obstructions": reports, "hodge": hodge}
    if link.d == 3:
        doc["ledger"] = neg1_ledger(link, seed=cfg["seed"])
    ok = all(h["min_eigenvalue"] >= -cfg["tol"] for h in hodge)
    doc["provenance"] = provenance("forms", cfg)
    write_json(out / "forms.json", doc)
    for r in reports:
        print(f"n={r['n']} lambda={r['lambda']:g} required={r['required_eigenvalue']:g} -> {r['verdict']}")
    return EXIT_OK if ok else EXIT_TOLERANCE


COMMANDS = {
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "calibration": cmd_calibration,
    "variation-decay": cmd_variation_decay,
    "forms": cmd_forms,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conestab", description="Stability of minimal cones: numerical checks.")
    parser.add_argument("--version", action="version", version=f"conestab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float)
        p.add_argument("--grid", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args.command, args)
        if cfg["seed"] < 0:
            raise ConfigError("seed must be non-negative")
        return COMMANDS[args.command](cfg, Path(args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnsupportedLink, UnsupportedOperation) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
