"""Command line entry point.

    cosmicorbit run <scenario.json | builtin> [...] [--out DIR] [--steps N] [--seed S] [--timing]
    cosmicorbit list
    cosmicorbit check <scenario.json | builtin> [...]

Exit codes: 0 success, 2 invalid scenario, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import NumericalError, ScenarioError
from .runner import run_scenario
from .scenario import list_builtins, resolve

log = logging.getLogger("cosmicorbit")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _fmt_vec(v) -> str:
    return "-" if v is None else "(" + ", ".join(f"{c:.6g}" for c in v) + ")"


def _report(summary) -> str:
    """Tab-delimited one-line digest of a run."""
    cols = [
        summary.scenario,
        summary.verdict["case"],
        "v=" + _fmt_vec(summary.v_estimate),
        "limit=" + _fmt_vec(summary.cosmic_limit),
        "final_q=" + _fmt_vec(summary.final_direction),
    ]
    if summary.gap_estimate is not None:
        cols.append("gap=" + _fmt_vec(summary.gap_estimate))
    if summary.cone_flags is not None:
        cols.append(f"cluster={summary.cone_flags['cluster']['shape']}")
    if summary.reference_distance is not None:
        cols.append(f"ref_dist={summary.reference_distance:.3g}")
    if summary.conjectural:
        cols.append("CONJECTURAL")
    if summary.wall_time is not None:
        cols.append(f"wall={summary.wall_time:.3f}s")
    return "\t".join(cols)


def cmd_run(args) -> int:
    for target in args.targets:
        s = resolve(target)
        summary, paths = run_scenario(s, args.out, steps=args.steps, seed=args.seed, timing=args.timing)
        print(_report(summary))
        for p in paths:
            log.info("wrote %s", p)
    return EXIT_OK


def cmd_list(args) -> int:
    for name, desc in list_builtins():
        print(f"{name}\t{desc}")
    return EXIT_OK


def cmd_check(args) -> int:
    for target in args.targets:
        s = resolve(target)
        print(f"ok\t{s.name}\tdim={s.dim}\toperator={s.operator['type']}\tn_steps={s.n_steps}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cosmicorbit", description="Iterate nonexpansive operators and "
                                "diagnose cosmic convergence of the normalized iterates.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run scenarios and write orbit CSV, summary JSON and SVG")
    r.add_argument("targets", nargs="+", metavar="SCENARIO", help="scenario JSON file or builtin name")
    r.add_argument("--out", default=".", help="output directory (default: current directory)")
    r.add_argument("--steps", type=int, default=None, help="override the scenario's n_steps")
    r.add_argument("--seed", type=int, default=None,
                   help="also run the seeded (firm) nonexpansiveness check; never affects orbits")
    r.add_argument("--timing", action="store_true", help="record wall time in the summary (breaks byte identity)")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list builtin scenarios")
    ls.set_defaults(func=cmd_list)

    c = sub.add_parser("check", help="validate scenarios without running them")
    c.add_argument("targets", nargs="+", metavar="SCENARIO")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        where = f" (step {exc.step})" if exc.step is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
