"""Command-line front end.

Subcommands map one-to-one onto the reference experiments:

    nfloc crb-sweep      --axis power|symbols|antennas
    nfloc likelihood-map --arch moving,fixed,extended
    nfloc monte-carlo    --trials 100
    nfloc ratio-check    --values 10,30,100

Exit codes: 0 success, 2 configuration error, 3 every row degenerate,
4 output I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    ConfigError,
    parse_config,
    run_crb_sweep,
    run_likelihood_map,
    run_monte_carlo,
    run_ratio_check,
)
from .crb import DegenerateGeometryError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--scheme", choices=["sem", "iso"])
    parser.add_argument("--arch", help="comma list of moving,fixed,extended")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfloc",
        description="Near-field localization with a moving array: CRB sweeps, "
        "likelihood maps, Monte-Carlo benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crb-sweep", help="CRB versus power / symbols / antennas")
    _add_common(p)
    p.add_argument("--axis", choices=["power", "symbols", "antennas"])
    p.add_argument("--values", help="comma list of axis values")

    p = sub.add_parser("likelihood-map", help="2D concentrated log-likelihood map")
    _add_common(p)
    p.add_argument("--region", help="x_min,x_max,y_min,y_max in meters")
    p.add_argument("--resolution", type=float, help="grid step in meters")

    p = sub.add_parser("monte-carlo", help="estimator RMSE versus sqrt(CRB)")
    _add_common(p)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("ratio-check", help="moving/extended CRB ratio convergence")
    _add_common(p)
    p.add_argument("--values", help="comma list of platform-size multiples")

    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("scheme", "arch", "seed", "out", "axis", "values", "region",
            "resolution", "trials")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = cfg.out or None
    try:
        if args.command == "crb-sweep":
            rows = run_crb_sweep(cfg, out=out)
            bad = sum(1 for row in rows if row[-1])
            for row in rows:
                print(",".join(str(c) for c in row))
            if bad == len(rows):
                print("all sweep rows degenerate", file=sys.stderr)
                return EXIT_DEGENERATE
        elif args.command == "likelihood-map":
            architectures = cfg.arch
            for i, arch in enumerate(architectures):
                target = out
                if target and len(architectures) > 1:
                    stem, dot, ext = target.rpartition(".")
                    target = f"{stem}_{arch}{dot}{ext}" if dot else f"{target}_{arch}"
                summary = run_likelihood_map(cfg, arch, out=target)
                print(
                    f"{arch}: argmax=({summary['argmax_x']:.4f}, "
                    f"{summary['argmax_y']:.4f}) refined=({summary['refined_x']:.4f}, "
                    f"{summary['refined_y']:.4f})"
                )
        elif args.command == "monte-carlo":
            for arch in cfg.arch:
                target = out
                if target and len(cfg.arch) > 1:
                    stem, dot, ext = target.rpartition(".")
                    target = f"{stem}_{arch}{dot}{ext}" if dot else f"{target}_{arch}"
                summary = run_monte_carlo(cfg, arch, out=target)
                print(
                    f"{arch}: rmse={summary['rmse']:.6e} m, "
                    f"sqrt(CRB)={summary['crb_rmse']:.6e} m over "
                    f"{summary['trials']} trials"
                )
        elif args.command == "ratio-check":
            summary = run_ratio_check(cfg, cfg.values, out=out)
            print(
                f"ratio={summary['ratio']:.4f} matches {summary['matched']} "
                f"(deviation {summary['deviation']:.2%}); candidates "
                f"L^2/4N^2={summary['candidate_sq']:.4f}, "
                f"L^2/4N={summary['candidate_lin']:.4f}"
            )
    except DegenerateGeometryError as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
