"""Command-line entry point.

Subcommands:

* ``run <config.yaml>``  -- execute an experiment grid from a config file;
* ``demo``               -- one seeded instance with protocol defaults, no
  config file needed;
* ``validate``           -- run the built-in property checks.

Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, RproxgradError

__all__ = ["build_parser", "cli_main", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rproxgrad",
        description=(
            "Proximal gradient solvers on the oblique and Stiefel manifolds: "
            "sparse-PCA experiments, demos, and self-checks."
        ),
    )
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run an experiment grid from a YAML config")
    run_p.add_argument("config", help="path to the experiment config file")
    run_p.add_argument("--output", help="output directory (overrides the config)")
    run_p.add_argument("--workers", type=int, help="worker count (overrides the config)")

    demo_p = sub.add_parser("demo", help="run one seeded instance with defaults")
    demo_p.add_argument("--variant", default="oblique", choices=("oblique", "stiefel"))
    demo_p.add_argument("--n", type=int, default=32)
    demo_p.add_argument("--p", type=int, default=4)
    demo_p.add_argument("--m", type=int, default=20)
    demo_p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    demo_p.add_argument("--seed", type=int, default=1)
    demo_p.add_argument("--data", default="random", choices=("random", "synthetic"))
    demo_p.add_argument(
        "--solvers", default="rpg,varpg,parpg",
        help="comma-separated subset of rpg,varpg,parpg",
    )
    demo_p.add_argument("--max-iterations", type=int, default=None,
                        help="override the outer iteration cap")
    demo_p.add_argument("--output", help="write report.csv and traces here")

    sub.add_parser("validate", help="run the built-in property checks")
    return parser


def _cmd_run(args) -> int:
    from .harness import load_config, run_experiment

    config = load_config(args.config)
    if args.output is not None:
        config.output_dir = args.output
    if args.workers is not None:
        config.workers = args.workers
    report = run_experiment(config)
    _print_aggregates(report)
    if report.report_path:
        print(f"report written to {report.report_path}")
    return 0


def _cmd_demo(args) -> int:
    from .harness import ExperimentConfig, run_experiment
    from .spca import experiment_lipschitz_options

    options = {}
    if args.max_iterations is not None:
        options["max_iterations"] = args.max_iterations
    config = ExperimentConfig(
        variant=args.variant,
        n_values=(args.n,),
        p_values=(args.p,),
        m_values=(args.m,),
        lambda_values=(args.lam,),
        data=args.data,
        repetitions=1,
        seed=args.seed,
        solvers=tuple(s.strip() for s in args.solvers.split(",") if s.strip()),
        solver_options=options,
        per_solver_options=experiment_lipschitz_options(args.variant),
        output_dir=args.output,
        emit_traces=args.output is not None,
    )
    report = run_experiment(config)
    for row in report.rows:
        print(
            f"{row['solver']:>6}: iterations={row['iterations']:<7} "
            f"F={row['final_value']:.6g} sparsity={row['sparsity']:.3f} "
            f"seconds={row['seconds']:.3f} [{row['termination']}]"
        )
    if report.report_path:
        print(f"report written to {report.report_path}")
    return 0


def _cmd_validate() -> int:
    from .validation import run_checks

    results = run_checks()
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        line = f"{status}  {name}"
        if detail:
            line += f"  ({detail})"
        print(line)
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 3


def _print_aggregates(report) -> None:
    for agg in report.aggregates:
        print(
            f"{agg['variant']} n={agg['n']} p={agg['p']} m={agg['m']} "
            f"lambda={agg['lambda']} {agg['solver']:>6}: "
            f"runs={agg['runs']} failures={agg['failures']} "
            f"mean_iterations={agg['mean_iterations']:.1f} "
            f"mean_sparsity={agg['mean_sparsity']:.3f} "
            f"mean_seconds={agg['mean_seconds']:.3f}"
        )


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage()
        return 2
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "demo":
            return _cmd_demo(args)
        return _cmd_validate()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (RproxgradError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli_main())
