"""Command-line front end.

Exit codes: 0 success, 1 parse/validation error, 2 numerical failure,
3 acceptance-suite failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dynamics import AngleSingularity
from .logio import FIGURES, EmptyWindow, LogFormatError, UnknownFigure, emit_figure_data, read_log, \
    summarize, write_log
from .scenario import ScenarioError, parse_scenario, resolve_seed, scenario_to_dict
from .simulation import NonFiniteState, run_scenario

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_SUITE = 0, 1, 2, 3


def _thresholds(pairs: list[str]) -> dict[str, float]:
    out = {}
    for pair in pairs:
        axis, _, value = pair.partition("=")
        if axis not in ("z", "phi", "theta", "psi") or not value:
            raise argparse.ArgumentTypeError(f"bad threshold {pair!r}; use AXIS=VALUE")
        out[axis] = float(value)
    return out


def cmd_run(args) -> int:
    sc = resolve_seed(parse_scenario(args.scenario), args.seed)
    log = run_scenario(sc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_log(log, out / "log.csv")
    (out / "scenario.json").write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n")
    warmup = sc.observer.t_obs if sc.observer.in_loop else 0.0
    summary = summarize(log, warmup=warmup)
    (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    for fig in args.figures or ():
        emit_figure_data(log, fig, out / f"{fig}.dat")
    print(f"wrote {len(log)} records to {out / 'log.csv'} ({summary.wall_time:.2f} s)")
    return EXIT_OK


def cmd_summarize(args) -> int:
    summary = summarize(read_log(args.log), _thresholds(args.threshold), args.warmup)
    print(json.dumps(summary.to_dict(), indent=2))
    return EXIT_OK


def cmd_figure(args) -> int:
    log_path = Path(args.log)
    out = Path(args.out) if args.out else log_path.with_name(f"{args.id}.dat")
    emit_figure_data(read_log(log_path), args.id, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_suite(args) -> int:
    from .acceptance import run_suite

    results = run_suite(args.out, jobs=args.jobs, report=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_SUITE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smcquad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario file")
    run.add_argument("scenario", help="JSON scenario file (empty file = defaults)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="overrides SMCQUAD_SEED and the file")
    run.add_argument("--figures", nargs="*", choices=sorted(FIGURES), metavar="figN",
                     help="also write these figure data files")
    run.set_defaults(func=cmd_run)

    summ = sub.add_parser("summarize", help="print metrics for a CSV log")
    summ.add_argument("log")
    summ.add_argument("--warmup", type=float, default=0.0, help="ignore samples before this time (s)")
    summ.add_argument("--threshold", action="append", default=[], metavar="AXIS=VALUE",
                      help="convergence threshold, e.g. z=0.01 (repeatable)")
    summ.set_defaults(func=cmd_summarize)

    fig = sub.add_parser("figure", help="extract the data of one figure from a CSV log")
    fig.add_argument("log")
    fig.add_argument("--id", required=True, help=f"one of {', '.join(FIGURES)}")
    fig.add_argument("--out", default=None, help="output file (default: <log dir>/<id>.dat)")
    fig.set_defaults(func=cmd_figure)

    suite = sub.add_parser("suite", help="run the acceptance scenarios and print pass/fail")
    suite.add_argument("--out", default=None, help="write each scenario log under this directory")
    suite.add_argument("--jobs", type=int, default=1, help="parallel scenario runs")
    suite.set_defaults(func=cmd_suite)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, LogFormatError, UnknownFigure, EmptyWindow, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NonFiniteState, AngleSingularity) as exc:
        where = f" at step {exc.step}" if getattr(exc, "step", None) is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
