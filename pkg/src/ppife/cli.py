"""Command-line driver for convergence studies."""

from __future__ import annotations

import argparse
import logging
import sys

from .study import StudyError, format_table, load_config, run_study


def _n_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="ppife-study",
        description="Convergence study of the symmetric partially penalized IFE "
                    "method for the Helmholtz interface problem.")
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--N", type=_n_list, dest="N_list", metavar="LIST",
                   help="comma-separated mesh sizes, each double the previous")
    p.add_argument("--k", type=float, help="wave number")
    p.add_argument("--beta-minus", type=float, dest="beta_minus")
    p.add_argument("--beta-plus", type=float, dest="beta_plus")
    p.add_argument("--sigma0", type=float, help="penalty (default 30*max(beta))")
    p.add_argument("--element-type", choices=("tri", "rect"), dest="element_type")
    p.add_argument("--alpha", type=float, help="exponent of the radial solution")
    p.add_argument("--r0", type=float, help="radius of the circular interface")
    p.add_argument("--out", metavar="PATH", help="CSV output path")
    p.add_argument("--threads", type=int, help="BLAS thread limit (1 = deterministic)")
    p.add_argument("--dump-matrix", metavar="PATH", dest="dump_matrix",
                   help="write A as 'row col re im' text ({N} is substituted)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        config = load_config(args.config, **overrides)
        config.validate()
    except (OSError, ValueError, TypeError) as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return 2
    try:
        report = run_study(config)
    except StudyError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(format_table(report))
    if config.out:
        print(f"wrote {config.out}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
