#!/usr/bin/env python3
"""
koopman-sampling command line

    koopman-sampling [--seed N] [--out-dir DIR] [--jobs J] [-v] <command> ...

Commands: critical-period, sweep, alias-demo, predict, spectral, simulate, serve.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from config.settings import Config
from koopman.dynamics import builtin_system, list_systems, load_system
from koopman.errors import ConfigError, KoopmanError, NumericError
from koopman.observables import build_dictionary, custom_dictionary

from . import experiments
from .config import ExperimentConfig, apply_overrides, load_experiment, preset_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{text}'")


def _period(text: str) -> float:
    """Number, or an expression in pi such as 4*pi/9"""
    cleaned = text.replace(" ", "")
    try:
        return float(cleaned)
    except ValueError:
        pass
    factors = cleaned.replace("pi", str(math.pi))
    try:
        value = 1.0
        numerator, _, denominator = factors.partition("/")
        for part in numerator.split("*"):
            value *= float(part)
        if denominator:
            value /= float(denominator)
        return value
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read sampling period '{text}'")


def _params(items: Optional[Sequence[str]]) -> Dict[str, float]:
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"parameter '{item}' must look like name=value")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"parameter '{key}' must be numeric, got '{value}'")
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="koopman-sampling",
                                     description="Critical sampling period and aliasing experiments for Koopman identification")
    parser.add_argument("--seed", type=int, default=None, help="random seed (mandatory for sampling commands)")
    parser.add_argument("--out-dir", type=Path, default=None, help=f"output root (default {Config.DEFAULT_OUT_DIR})")
    parser.add_argument("--jobs", type=int, default=None, help=f"worker processes (default {Config.JOBS})")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(p: argparse.ArgumentParser) -> None:
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--config", type=Path, help="experiment TOML file")
        source.add_argument("--system", help=f"builtin preset ({', '.join(list_systems())})")
        p.add_argument("--param", action="append", help="builtin parameter name=value (repeatable)")
        p.add_argument("--n-traj", type=int)
        p.add_argument("--n-snap", type=int)
        p.add_argument("--grid", type=_floats, help="explicit T_s list, e.g. 0.5,1.1,2.8")

    p = sub.add_parser("critical-period", help="critical sampling period of a system or spectrum")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--system", help="builtin system name")
    source.add_argument("--system-file", type=Path, help="system definition TOML")
    source.add_argument("--spectrum-file", type=Path, help="spectrum TOML (one or more candidate spectra)")
    p.add_argument("--param", action="append", help="builtin parameter name=value (repeatable)")
    p.add_argument("--T-s", dest="T_s", type=_period, help="also judge this sampling period")
    p.add_argument("--dictionary-degree", type=int, help="use the true generator on the degree-m dictionary")
    p.add_argument("--basis", type=lambda s: [b.strip() for b in s.split(",")], help="custom dictionary labels")
    p.add_argument("--products", type=int, help="report the bound for eigenvalue sums up to this order")

    p = sub.add_parser("sweep", help="NRMSE against sampling period")
    experiment_args(p)

    p = sub.add_parser("alias-demo", help="rotating rod seen through a periodic camera")
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--omega", type=float, default=3.0)
    p.add_argument("--T-s", dest="T_s", type=_period, default=4 * math.pi / 9)
    p.add_argument("--photos", type=int, default=10)
    p.add_argument("--rate", type=float, default=100.0)
    p.add_argument("--x0", type=_floats, default=[1.0, 0.0])

    p = sub.add_parser("predict", help="true against identified trajectories")
    experiment_args(p)
    p.add_argument("--periods", type=_floats)
    p.add_argument("--x0", type=_floats)
    p.add_argument("--horizon", type=float)
    p.add_argument("--rate", dest="rate_hz", type=float)

    p = sub.add_parser("spectral", help="DFT spectral error against sampling period")
    experiment_args(p)

    p = sub.add_parser("simulate", help="integrate a system and export its trajectory")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--system")
    source.add_argument("--system-file", type=Path)
    p.add_argument("--param", action="append")
    p.add_argument("--x0", type=_floats, default=[0.5, 0.5])
    p.add_argument("--horizon", type=float, default=5.0)
    p.add_argument("--rate", type=float, default=100.0)

    p = sub.add_parser("serve", help="expose the analysis tools over MCP (HTTP)")
    p.add_argument("--port", type=int, default=None)

    return parser


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "seed": args.seed,
        "n_traj": args.n_traj,
        "n_snap": args.n_snap,
        "grid": args.grid,
        "out_dir": args.out_dir,
        "periods": getattr(args, "periods", None),
        "x0": getattr(args, "x0", None),
        "horizon": getattr(args, "horizon", None),
        "rate_hz": getattr(args, "rate_hz", None),
    }
    if args.config is not None:
        return load_experiment(args.config, overrides)
    return apply_overrides(preset_config(args.system, args.seed, _params(args.param)), overrides)


def _system(args: argparse.Namespace):
    if getattr(args, "system_file", None) is not None:
        return load_system(args.system_file)
    return builtin_system(args.system, _params(args.param))


def run(args: argparse.Namespace) -> int:
    out_root = args.out_dir or Config.DEFAULT_OUT_DIR
    out_dir = out_root / args.command

    if args.command == "critical-period":
        if args.spectrum_file is not None:
            report = experiments.cmd_critical_period(spectra=experiments.load_spectra(args.spectrum_file),
                                                     T_s=args.T_s, degree=args.products)
        else:
            system = _system(args)
            dictionary = None
            if args.basis:
                dictionary = custom_dictionary(args.basis, system.dim)
            elif args.dictionary_degree:
                dictionary = build_dictionary(system.dim, args.dictionary_degree)
            report = experiments.cmd_critical_period(system, T_s=args.T_s, dictionary=dictionary,
                                                     degree=args.products)
        verdict = report.verdict
        print(f"{report.system}: T_gamma = {verdict.T_gamma:.12g} s, "
              f"minimum frequency = {verdict.min_frequency:.12g} rad/s ({report.source})")
        if verdict.no_aliasing_at is not None:
            T_s, ok = verdict.no_aliasing_at
            print(f"T_s = {T_s:.12g} s: {'no aliasing' if ok else 'aliasing possible'}")
        if report.lattice_verdict is not None:
            print(f"eigenvalue sums up to order {args.products}: T_gamma = {report.lattice_verdict.T_gamma:.12g} s")
        report.save(out_dir)

    elif args.command == "sweep":
        result = experiments.cmd_sweep(_experiment(args), jobs=args.jobs)
        print(f"wrote {result.save(out_dir)}")

    elif args.command == "alias-demo":
        demo = experiments.cmd_alias_demo(args.a, args.omega, args.T_s, args.photos, args.rate, args.x0)
        if demo.no_aliasing:
            print("no aliasing: the recovered generator equals the true one")
        else:
            print(f"alias angular velocity {demo.alias_angular_velocity:.12g} rad/s, "
                  f"sample gap {demo.sample_gap:.3e}, dense gap {demo.dense_gap:.3g}")
        if not demo.nyquist["band_limited"]:
            print("states are not band-limited (a != 0); Nyquist bound does not apply")
        print(f"wrote {demo.save(out_dir)}")

    elif args.command == "predict":
        result = experiments.cmd_predict(_experiment(args), jobs=args.jobs)
        print(f"wrote {result.save(out_dir)}")

    elif args.command == "spectral":
        result = experiments.cmd_spectral(_experiment(args), jobs=args.jobs)
        print(f"wrote {result.save(out_dir)}")

    elif args.command == "simulate":
        trajectory = experiments.cmd_simulate(_system(args), args.x0, args.horizon, args.rate)
        print(f"wrote {trajectory.save(out_dir)}")

    elif args.command == "serve":
        from koopman_tools_server import main as serve_main
        serve_main(port=args.port)

    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, Config.LOG_LEVEL),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    logger.info(f"Running {args.command}")
    try:
        code = run(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        logger.error(f"Numerical failure ({e.error_type}): {e}")
        print(f"error: {e.error_type}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except KoopmanError as e:
        logger.error(f"Failure ({e.error_type}): {e}")
        return EXIT_NUMERIC
    logger.info(f"Finished {args.command}")
    return code


if __name__ == "__main__":
    sys.exit(main())
