"""Command-line front end: ``cavcool run`` and ``cavcool scan-n``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .scenarios import (EXIT_CONFIG, EXIT_OK, PRESETS, ConfigError, parse_config, run_scenario,
                        scan_atom_numbers)

log = logging.getLogger("cavcool")

# flag dest -> SimParams / RunConfig key
_FLAG_KEYS = {"n_atoms": "n_atoms", "n_modes": "n_modes", "u0": "u0", "gamma": "gamma",
              "delta": "delta", "eta": "eta", "kappa_over_omega_r": "kappa_over_omega_r",
              "dt": "dt", "t_final": "t_final", "trajectories": "n_trajectories", "seed": "seed",
              "threads": "threads", "out": "out_dir", "formats": "formats"}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file; flags override its values")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--n-atoms", type=int)
    p.add_argument("--n-modes", type=int)
    p.add_argument("--u0", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--kappa-over-omega-r", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--seed", type=int, help="default: $CAVCOOL_SEED, else the preset seed")
    p.add_argument("--threads", type=int, help="default: available parallelism")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--formats", help="comma separated subset of csv,json,svg")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavcool",
                                     description="Monte Carlo simulation of cavity cooling.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    _add_common(run)
    run.add_argument("--predict-only", action="store_true",
                     help="write the closed-form predictions without simulating")
    scan = sub.add_parser("scan-n", help="repeat a preset over atom numbers")
    _add_common(scan)
    scan.add_argument("--n", required=True, help="comma separated atom numbers, e.g. 1,2,4,8")
    return parser


def _inputs(args: argparse.Namespace) -> tuple[dict, dict]:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    overrides = {key: getattr(args, dest) for dest, key in _FLAG_KEYS.items()}
    if overrides["seed"] is None and "CAVCOOL_SEED" in os.environ:
        has_seed = "seed" in data or "seed" in (data.get("params") or {})
        if not has_seed:
            overrides["seed"] = int(os.environ["CAVCOOL_SEED"])
    overrides["preset"] = args.preset
    return data, overrides


def config_from_args(args: argparse.Namespace):
    return parse_config(*_inputs(args))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        if args.command == "scan-n":
            ns = [int(x) for x in args.n.split(",") if x.strip()]
            if not ns or min(ns) < 1:
                raise ConfigError("--n needs positive atom numbers")
    except (ConfigError, OSError, ValueError) as exc:
        print(f"cavcool: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        summary, code = run_scenario(cfg, predict_only=args.predict_only)
        fit = summary.get("simulation", {}).get("fit")
        if fit:
            print(f"tau_c = {fit['tau_c']:.6g} 1/kappa, k_B T = {fit['k_b_t']:.6g} hbar omega_R")
        print(f"results in {cfg.out_dir}")
        return code

    rows = scan_atom_numbers(ns, *_inputs(args))
    for r in rows:
        print(f"N = {r['n']:4d}  tau_c = {r['tau_c']:.6g}  k_B T = {r['k_b_t']:.6g}  exit {r['exit_code']}")
    codes = [r["exit_code"] for r in rows if r["exit_code"] != EXIT_OK]
    return max(codes) if codes else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
