"""
Command-line front end

    python -m app run app/data/case1.cfg --out runs/case1 --svg
    python -m app check app/data/case2.cfg
    python -m app goldens --out runs/goldens
    python -m app sweep --trials 8 --nodes 6 --seed 1
    python -m app serve

Exit codes: 0 success, 1 validation error, 2 transform/integration failure, 3 acceptance failure.
"""
import argparse
import logging
import sys

from .config import get_settings, setup_logging
from .configfile import load_config
from .exceptions import AcceptanceError, AttsyncError
from .services import runner

logger = logging.getLogger(__name__)

EXIT_OK = 0


def _print_summary(summary) -> None:
    status = "converged" if summary.convergence.passed else "not converged"
    print(f"{summary.case}: {status}")
    print(f"  strong={summary.strong} quasi_strong={summary.quasi_strong} roots={summary.roots}")
    print(f"  class={summary.initial_class or '-'} v={summary.transform_v or '-'}")
    print(f"  final disagreement={summary.final_disagreement:.6g} eps*={summary.final_eps_star:.6g}")
    print(f"  monotone eps*: {summary.monotone.message}")
    print(f"  convergence: {summary.convergence.message}")
    for path in summary.files:
        print(f"  wrote {path}")


def cmd_run(args) -> int:
    config = load_config(args.config)
    _, summary = runner.run(config, args.out, svg=True if args.svg else None)
    _print_summary(summary)
    return EXIT_OK


def cmd_check(args) -> int:
    report = runner.check(load_config(args.config))
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_goldens(args) -> int:
    report = runner.goldens(args.out)
    for case in report.cases:
        print(f"{case.case}: {'PASS' if case.passed else 'FAIL'}")
        for reason in case.reasons:
            print(f"  - {reason}")
    if not report.passed:
        failed = ", ".join(c.case for c in report.cases if not c.passed)
        raise AcceptanceError(f"golden cases failed: {failed}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    report = runner.sweep(trials=args.trials, nodes=args.nodes, seed=args.seed, t_final=args.t_final)
    for trial in report.trials:
        print(
            f"trial {trial.trial}: {'PASS' if trial.passed else 'FAIL'} "
            f"roots={trial.roots} disagreement={trial.final_disagreement:.3g}"
        )
    print(f"pass rate {report.pass_rate:.0%}")
    if report.pass_rate < 1.0:
        raise AcceptanceError(f"{sum(not t.passed for t in report.trials)} of {len(report.trials)} trials did not converge")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    settings = get_settings()
    uvicorn.run("app.main:app", host=args.host or settings.HOST, port=args.port or settings.PORT)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # subcommands only set --quiet when given, so the top-level value survives
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="Only log warnings and errors")

    parser = argparse.ArgumentParser(
        prog="attsync",
        description="Attitude synchronization of networked rigid bodies over directed graphs",
    )
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="Simulate a config and write CSV/SVG output")
    p.add_argument("config", help="Path to a config file")
    p.add_argument("--out", default=None, help="Output directory (default: config path or OUTPUT_DIR/<name>)")
    p.add_argument("--svg", action="store_true", help="Also write SVG plots")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", parents=[common], help="Connectivity and initial-condition analysis only")
    p.add_argument("config", help="Path to a config file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("goldens", parents=[common], help="Run the bundled cases and check acceptance")
    p.add_argument("--out", default=None, help="Output directory (default: OUTPUT_DIR)")
    p.set_defaults(func=cmd_goldens)

    p = sub.add_parser("sweep", parents=[common], help="Random quasi-strongly connected graphs")
    p.add_argument("--trials", type=int, default=8, help="Number of random graphs (default: 8)")
    p.add_argument("--nodes", type=int, default=6, help="Agents per graph (default: 6)")
    p.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    p.add_argument("--t-final", type=float, default=100.0, help="Horizon in seconds (default: 100)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", parents=[common], help="Start the HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("WARNING" if args.quiet else None)
    logger.debug(f"Running command: {args.command}")
    try:
        return args.func(args)
    except AttsyncError as e:
        print(e.one_line(), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error[io]: {' '.join(str(e).split())}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
