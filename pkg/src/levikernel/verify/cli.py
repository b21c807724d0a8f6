"""Command-line entry point.

    levikernel run --config <path> --suite <sel> --out <dir> [--refine N] [--seed S]

Suites: scale, model, symkernel, parametrix, simulate, or all.  Exit codes:
0 all enabled checks passed, 1 at least one check failed, 2 configuration or
usage error.  LEVIKERNEL_WORKERS bounds the worker pool for suites whose
inputs are already materialized.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from ..model import ConfigError, load_model
from .report import Report
from . import suites as suites_mod

VALID_SUITES = list(suites_mod.SUITES) + ["all"]

# suites whose heavy inputs are independent may run concurrently once the
# context exists; the context itself is built serially
_RUNNERS = {
    "scale": suites_mod.run_scale,
    "model": suites_mod.run_model,
    "symkernel": suites_mod.run_symkernel,
    "parametrix": suites_mod.run_parametrix,
    "simulate": suites_mod.run_simulate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="levikernel")
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run verification suites")
    run.add_argument("--config", required=True, help="model JSON document")
    run.add_argument("--suite", default="all",
                     help=f"one of {', '.join(VALID_SUITES)}")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--refine", type=int, default=0,
                     help="extra refinement levels for grid-based suites")
    run.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "run":
        parser.print_help()
        return 2
    if args.suite not in VALID_SUITES:
        print(f"error: unknown suite '{args.suite}'; valid selectors: "
              f"{', '.join(VALID_SUITES)}", file=sys.stderr)
        return 2
    try:
        models = load_model(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    selected = list(suites_mod.SUITES) if args.suite == "all" else [args.suite]
    ctx = suites_mod.Context(models=models, out_dir=args.out,
                             seed=args.seed, refine=args.refine)
    reports = {name: Report(name, _config_digest(models), seed=args.seed)
               for name in selected}

    workers = int(os.environ.get("LEVIKERNEL_WORKERS", "1"))
    if workers > 1 and len(selected) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {name: pool.submit(_RUNNERS[name], ctx, reports[name])
                    for name in selected}
            for name, fut in futs.items():
                fut.result()
    else:
        for name in selected:
            _RUNNERS[name](ctx, reports[name])

    merged = Report(args.suite, _config_digest(models), seed=args.seed)
    for name in selected:
        merged.results.extend(reports[name].results)
    path = merged.save(args.out)
    failed = [r for r in merged.results if not r.passed]
    print(f"report: {path} ({len(merged.results)} checks, "
          f"{len(failed)} failed)")
    if failed:
        for r in failed:
            print(f"failed: {r.check_id} [{r.anchor}] {r.detail}",
                  file=sys.stderr)
        return 1
    return 0


def _config_digest(models) -> dict:
    out = []
    for m in models:
        out.append({"d": m.d, "alpha": m.alpha, "b": m.b, "beta": m.beta,
                    "T": m.T, "kappa_family": m.kappa.family,
                    "kappa_bounds": [m.kappa.kappa0, m.kappa.kappa1]})
    return {"profiles": out}


if __name__ == "__main__":
    sys.exit(main())
