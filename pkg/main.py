#!/usr/bin/env python3
"""
Load-Balancing Routing Game Solver

Selfish and altruistic Nash equilibria, social optima, Wardrop equilibria,
Price of Anarchy and Value of Unilateral Altruism for atomic splittable
routing on load-balancing networks.

Usage:
  python main.py run SCENARIO --out DIR        # Run a scenario file
  python main.py reproduce-paper --out DIR     # Run the published-claims suite
  python main.py sweep --m-from 2 --m-to 6     # PoA / VoU along delta_m, c_m

Solver flags (all commands): --eps-fp --eps-eq --max-iter --grid-step
  --player-order 0,1 --seed N --workers N; add --plots for HTML figures
  and -v for debug logging.

Exit status: 0 success, 1 failed task or claim, 2 bad input or parameters.
"""

import argparse
import logging
import sys

from config import (
    CANONICAL_C0, CANONICAL_DELTA0, CANONICAL_L, CANONICAL_R, SWEEP_M_VALUES, SolverSettings,
)
from errors import ConfigurationError, ParameterRegimeError, RoutingError, ScenarioError
from export import write_record, write_table
from metrics import SWEEP_COLUMNS, m_sweep
from network import ParamSequence
from reproduce import emit_paper_reproduction
from scenario import run_scenario


def _progress(message, pct):
    if pct is None:
        print(f"  {message}")
    else:
        print(f"  [{pct * 100:5.1f}%] {message}")


def _overrides(args):
    order = None
    if args.player_order:
        order = tuple(int(i) for i in args.player_order.split(","))
    return {
        "eps_fp": args.eps_fp,
        "eps_eq": args.eps_eq,
        "max_iter": args.max_iter,
        "grid_step": args.grid_step,
        "player_order": order,
        "seed": args.seed,
        "workers": args.workers,
    }


def cmd_run(args):
    print("=" * 60)
    print(f"Scenario run: {args.scenario}")
    print("=" * 60)
    summary = run_scenario(args.scenario, args.out, _overrides(args), plots=args.plots, callback=_progress)

    print(f"\nResults written to {args.out}")
    for entry in summary["tasks"]:
        where = f" (m={entry['m']})" if entry["m"] is not None else ""
        line = f"  {entry['task']}{where}: {entry['status']}"
        if entry.get("detail"):
            line += f" - {entry['detail']}"
        print(line)
    return 1 if summary["failed"] else 0


def cmd_reproduce(args):
    print("=" * 60)
    print("Reproduction of published claims")
    print("=" * 60)
    settings = SolverSettings().with_overrides(**_overrides(args))
    report = emit_paper_reproduction(args.out, settings, callback=_progress)

    print(f"\n{'=' * 40}")
    print("CLAIMS")
    print(f"{'=' * 40}")
    for check in report.checks:
        print(f"  [{'PASS' if check.passed else 'FAIL'}] {check.name}: {check.computed}")
    print(f"\nDocumented discrepancies: {len(report.discrepancies)}")
    for note in report.discrepancies:
        print(f"  - {note['claim']}: computed {note['computed']}")
    if args.plots and report.sweep:
        from plots import sweep_figure, write_figure
        write_figure(sweep_figure(report.sweep), f"{args.out}/sweep.html")
    if not report.passed:
        print(f"\nFailed: {', '.join(report.failed)}")
        return 1
    print("\nAll claims reproduced.")
    return 0


def cmd_sweep(args):
    print("=" * 60)
    print(f"Parameter sweep m={args.m_from}..{args.m_to}, n={args.n}")
    print("=" * 60)
    seq = ParamSequence(args.delta0, args.c0, args.L, args.r)
    betas = [float(b) for b in args.betas.split(",")] if args.betas else None
    settings = SolverSettings().with_overrides(**_overrides(args))
    rows = m_sweep(seq, range(args.m_from, args.m_to + 1), args.n, betas, settings, callback=_progress)

    print(f"\n{'m':>3} {'delta_m':>10} {'c_m':>8} {'PoA':>12} {'VoU':>12}")
    for row in rows:
        vou = f"{row['vou']:12.6g}" if row["vou"] is not None else f"{'n/a':>12}"
        print(f"{row['m']:>3} {row['delta_m']:>10.3g} {row['c_m']:>8.4g} {row['poa']:>12.6g} {vou}")
    if args.out:
        write_table(f"{args.out}/sweep.csv", rows, SWEEP_COLUMNS)
        write_record(f"{args.out}/sweep.json", {"task": "sweep", "rows": rows, "table": "sweep.csv"})
        if args.plots:
            from plots import sweep_figure, write_figure
            write_figure(sweep_figure(rows), f"{args.out}/sweep.html")
        print(f"\nResults written to {args.out}")
    return 0


def _solver_flags(parser):
    parser.add_argument("--eps-fp", type=float, help="dynamics fixed-point tolerance (flow)")
    parser.add_argument("--eps-eq", type=float, help="equilibrium verification tolerance (cost)")
    parser.add_argument("--max-iter", type=int, help="best-response rounds before giving up")
    parser.add_argument("--grid-step", type=float, help="grid oracle step")
    parser.add_argument("--player-order", help="comma-separated round-robin order, e.g. 1,0")
    parser.add_argument("--seed", type=int, help="seed for randomized verifier starts")
    parser.add_argument("--workers", type=int, help="processes for sweeps")
    parser.add_argument("--plots", action="store_true", help="also write plotly HTML figures")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def build_parser():
    parser = argparse.ArgumentParser(
        description="Equilibria and efficiency metrics for load-balancing routing games.")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to the JSON scenario file")
    run.add_argument("--out", required=True, help="output directory")
    _solver_flags(run)

    rep = sub.add_parser("reproduce-paper", help="run the published-claims suite")
    rep.add_argument("--out", required=True, help="output directory")
    _solver_flags(rep)

    sweep = sub.add_parser("sweep", help="PoA and VoU along the parameter sequence")
    sweep.add_argument("--m-from", type=int, default=SWEEP_M_VALUES[0])
    sweep.add_argument("--m-to", type=int, default=SWEEP_M_VALUES[-1])
    sweep.add_argument("--n", type=int, default=2, help="players")
    sweep.add_argument("--delta0", type=float, default=CANONICAL_DELTA0)
    sweep.add_argument("--c0", type=float, default=CANONICAL_C0)
    sweep.add_argument("--L", type=float, default=CANONICAL_L)
    sweep.add_argument("--r", type=float, default=CANONICAL_R)
    sweep.add_argument("--betas", help="comma-separated altruism weights for VoU")
    sweep.add_argument("--out", help="output directory")
    _solver_flags(sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        print(__doc__)
        return 0

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    commands = {"run": cmd_run, "reproduce-paper": cmd_reproduce, "sweep": cmd_sweep}
    try:
        return commands[args.command](args)
    except (ScenarioError, ParameterRegimeError, ConfigurationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except RoutingError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
