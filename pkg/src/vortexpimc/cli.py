"""Command-line entry point.

Subcommands:
    run <config>       execute a sweep from a YAML document
    resume <config>    continue an interrupted sweep from its manifest
    formula a b mu N   print the closed-form R^2 predictions and beta0
    oracle a b mu L M  print the exact single-filament R^2 and a^2
    snapshot <config>  equilibrate one beta point and export bead positions

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .harness import run_sweep, sampler_config_for, snapshot_export
from .meanfield import beta_turning_point, gaussian_single_filament_oracle, r_squared_2d, r_squared_3d
from .sampler import Chain

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; bad usage is a config error here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> _Parser:
    parser = _Parser(prog="vortexpimc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep from a YAML config")
    p_run.add_argument("config", help="path to the YAML run document")

    p_resume = sub.add_parser("resume", help="continue a sweep from its manifest")
    p_resume.add_argument("config", help="path to the YAML run document")

    p_formula = sub.add_parser("formula", help="print mean-field predictions")
    p_formula.add_argument("alpha", type=float)
    p_formula.add_argument("beta", type=float)
    p_formula.add_argument("mu", type=float)
    p_formula.add_argument("N", type=int)

    p_oracle = sub.add_parser("oracle", help="print exact single-filament averages")
    p_oracle.add_argument("alpha", type=float)
    p_oracle.add_argument("beta", type=float)
    p_oracle.add_argument("mu", type=float)
    p_oracle.add_argument("L", type=float)
    p_oracle.add_argument("M", type=int)

    p_snap = sub.add_parser("snapshot", help="export bead positions for one beta")
    p_snap.add_argument("config", help="path to the YAML run document")
    p_snap.add_argument("--beta", type=float, required=True,
                        help="beta point to simulate (must appear in the sweep)")
    p_snap.add_argument("--out", required=True, help="output CSV path")
    p_snap.add_argument("--sweeps", type=int, default=None,
                        help="run exactly this many sweeps instead of the configured burn-in")
    return parser


def _g17(x: float) -> str:
    return format(x, ".17g")


def _cmd_sweep(config_path: str, resume: bool) -> int:
    cfg = load_config(config_path)
    report = run_sweep(cfg, resume=resume)
    print(f"output directory: {report.output_dir}")
    print(f"manifest: {report.manifest_path}")
    if report.csv_path:
        print(f"results: {report.csv_path}")
    print(f"completed {report.completed}/{len(cfg.betas)} beta points")
    for beta, error in report.failures:
        first = error.strip().splitlines()[-1] if error else "unknown error"
        print(f"FAILED beta={_g17(beta)}: {first}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_RUNTIME


def _cmd_formula(args) -> int:
    if args.alpha <= 0 or args.beta <= 0 or args.mu <= 0 or args.N < 1:
        raise ConfigError("formula: alpha, beta, mu must be > 0 and N >= 1")
    print(f"r2_3d {_g17(r_squared_3d(args.alpha, args.beta, args.mu, args.N))}")
    print(f"r2_2d {_g17(r_squared_2d(args.beta, args.mu, args.N))}")
    print(f"beta0 {_g17(beta_turning_point(args.alpha, args.mu, args.N))}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.alpha <= 0 or args.beta <= 0 or args.mu <= 0 or args.L <= 0 or args.M < 2:
        raise ConfigError("oracle: alpha, beta, mu, L must be > 0 and M >= 2")
    exact = gaussian_single_filament_oracle(args.alpha, args.beta, args.mu, args.L, args.M)
    print(f"r2_exact {_g17(exact.r_squared)}")
    print(f"a2_exact {_g17(exact.a_squared)}")
    return EXIT_OK


def _cmd_snapshot(args) -> int:
    cfg = load_config(args.config)
    if args.beta not in cfg.betas:
        listed = ", ".join(_g17(b) for b in cfg.betas)
        raise ConfigError(f"snapshot: beta {_g17(args.beta)} is not in the sweep ({listed})")
    if args.sweeps is not None and args.sweeps < 0:
        raise ConfigError("snapshot: --sweeps must be >= 0")
    index = cfg.betas.index(args.beta)
    params = cfg.system_params(args.beta)
    chain = Chain(params, sampler_config_for(cfg, index))
    if args.sweeps is None:
        used = chain.run_burnin()
        print(f"burn-in sweeps: {used}")
    else:
        chain.run_measurement(args.sweeps)
        print(f"sweeps: {args.sweeps}")
    snapshot_export(chain.state, params, args.out)
    print(f"snapshot: {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_sweep(args.config, resume=False)
        if args.command == "resume":
            return _cmd_sweep(args.config, resume=True)
        if args.command == "formula":
            return _cmd_formula(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "snapshot":
            return _cmd_snapshot(args)
        raise AssertionError(f"unhandled command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
