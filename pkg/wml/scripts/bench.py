#!/usr/bin/env python3
"""
wml-bench: experiments for wave matrix Lindbladization.

Runs the simulation algorithms against the exact Lindblad channel, sweeps
step counts, verifies the algebraic identities and prints the tomography
comparison. Every command keeps its full report in a cache for progressive
disclosure.

Usage Examples:
    # Single run (minimal output)
    wml-bench simulate --config experiment.json
    # Output:
    # Simulate: OK (alg 1, n=256, expectation, error 3.1e-03, 256 copies) [simulate-20261019-114501]

    # Convergence sweep written as CSV
    wml-bench sweep --config experiment.json --out sweep.csv

    # Identity suites (exit code 4 on failure)
    wml-bench verify-lemmas --trials 50

    # Tomography vs WML table
    wml-bench compare-tomography --d-values 2,4,8,16 --eps 0.1

    # LCU preparation report
    wml-bench prep-state --config linear.json --verbose

    # Retrieve a cached report
    wml-bench --get-report sweep-20261019-114501 --json
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from wml.common import tensor_utils
from wml.common.errors import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_LEMMA_FAILURE,
    EXIT_SUCCESS,
    ConfigError,
    WMLError,
)
from wml.engine.algorithms import (
    copies_needed,
    copies_needed_trotter,
    queries_needed,
    run_algorithm,
    system_dim,
)
from wml.engine.cache import ReportCache
from wml.engine.config import ExperimentConfig
from wml.engine.lcu import lcu_prepare_from_spec, lcu_prepare_poly
from wml.engine.lemmas import verify_lemmas
from wml.engine.reporter import (
    OutputFormatter,
    comparison_csv,
    sweep_csv,
    write_output,
)
from wml.engine.specs import LinearSpec, PolySpec
from wml.engine.sweep import (
    SweepRunner,
    branch_frequency_check,
    doubling_ratio,
    monte_carlo_consistency,
    trotter_error_ratio,
)
from wml.engine.tomography import compare_tomography, perturbation_bound_check

logger = logging.getLogger("wml")

COMMANDS = ["simulate", "sweep", "verify-lemmas", "compare-tomography", "prep-state"]


class _MessageFormatter(logging.Formatter):
    """'Warning: ...' / 'Error: ...' lines on stderr; debug records carry the module name."""

    def format(self, record: logging.LogRecord) -> str:
        message = record.getMessage()
        if record.levelno >= logging.ERROR:
            return f"Error: {message}"
        if record.levelno >= logging.WARNING:
            return f"Warning: {message}"
        if record.levelno <= logging.DEBUG:
            return f"debug: {record.name}: {message}"
        return message


def setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_MessageFormatter())
    logger.handlers[:] = [handler]
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _parse_d_values(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"--d-values must be comma-separated integers, got {text!r}"
        ) from e


def _mode(text: str) -> str:
    return text.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    config_group = common.add_argument_group("Config Options")
    config_group.add_argument(
        "--config", type=Path, help="Experiment JSON (default: ./.wml-bench/config.json)"
    )
    config_group.add_argument("--seed", type=int, help="Random seed (overrides experiment.seed)")
    config_group.add_argument(
        "--tol", type=float, help="Tolerance for mat_exp and invariant checks"
    )
    config_group.add_argument("--threads", type=int, help="Sweep worker threads")
    config_group.add_argument(
        "--ordering", choices=["forward", "palindromic"], help="Algorithm 2 ordering"
    )
    config_group.add_argument(
        "--mode",
        type=_mode,
        choices=["expectation", "monte_carlo"],
        help="expectation or monte-carlo",
    )

    output_group = common.add_argument_group("Output Options")
    output_group.add_argument("--out", type=Path, help="Write CSV/JSON results to this file")
    output_group.add_argument("--verbose", action="store_true", help="Show detailed output")
    output_group.add_argument("--json", action="store_true", help="Output as JSON")
    output_group.add_argument(
        "--timing", action="store_true", help="Include wall-clock columns in --out files"
    )
    output_group.add_argument(
        "--cache-dir", type=Path, help="Report cache (default: ~/.wml-bench/reports)"
    )

    parser = argparse.ArgumentParser(
        prog="wml-bench",
        description="Benchmark wave matrix Lindbladization against exact Lindblad evolution",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog="""
Examples:
  # Run the configured algorithm once
  wml-bench simulate --config experiment.json

  # Sweep n and write a CSV with the fitted slope
  wml-bench sweep --config experiment.json --out sweep.csv

  # Identity suites with a corrupted M (expected to fail)
  wml-bench verify-lemmas --corrupt-m

  # List and fetch cached reports
  wml-bench --list-reports
  wml-bench --get-report verify-lemmas-20261019-114501 --json
        """,
    )

    disclosure_group = parser.add_argument_group("Progressive Disclosure Options")
    disclosure_group.add_argument("--list-reports", action="store_true", help="List cached reports")
    disclosure_group.add_argument("--get-report", metavar="REPORT_ID", help="Show a cached report")

    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")

    simulate = sub.add_parser(
        "simulate", parents=[common], help="Run the configured algorithm once"
    )
    simulate.add_argument(
        "--consistency",
        action="store_true",
        help="Add Monte-Carlo consistency checks (algorithm 1)",
    )
    simulate.add_argument("--eps", type=float, help="Also report copies needed for this accuracy")

    sweep = sub.add_parser(
        "sweep", parents=[common], help="Error versus n with a fitted log-log slope"
    )
    sweep.add_argument(
        "--doubling", type=int, metavar="N", help="Also report error(2t)/error(t) at step count N"
    )

    lemmas = sub.add_parser("verify-lemmas", parents=[common], help="Randomized identity suites")
    lemmas.add_argument(
        "--trials", type=int, default=50, help="Random instances per suite (default: 50)"
    )
    lemmas.add_argument(
        "--corrupt-m", action="store_true", help="Drop the 1/sqrt(d) factor in M (negative control)"
    )

    compare = sub.add_parser(
        "compare-tomography", parents=[common], help="Tomography bound vs WML copies"
    )
    compare.add_argument(
        "--d-values", type=_parse_d_values, default=[2, 4, 8, 16], help="Comma-separated dimensions"
    )
    compare.add_argument("--eps", type=float, default=0.1, help="Target accuracy (default: 0.1)")
    compare.add_argument("-t", type=float, default=1.0, help="Evolution time (default: 1.0)")

    sub.add_parser(
        "prep-state", parents=[common], help="Simulate LCU preparation of the program state"
    )
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config)
    config.apply_overrides(
        {
            "seed": args.seed,
            "tol": args.tol,
            "threads": args.threads,
            "ordering": args.ordering,
            "mode": args.mode,
        }
    )
    if args.ordering is not None:
        config.experiment["orderings"] = [args.ordering]
    return config


def _out_path(args: argparse.Namespace, config: ExperimentConfig | None) -> Path | None:
    if args.out is not None:
        return args.out
    if config is not None and config.experiment.get("output_path"):
        return Path(config.experiment["output_path"])
    return None


def _emit(
    args: argparse.Namespace, data: dict[str, Any], minimal: str, verbose: str | None = None
) -> None:
    if args.json:
        sys.stdout.write(OutputFormatter.format_json(data))
    elif args.verbose and verbose is not None:
        print(verbose)
    else:
        print(minimal)


def cmd_simulate(args: argparse.Namespace, cache: ReportCache) -> int:
    config = _load_config(args)
    inputs = config.build_spec()
    rho = config.build_rho(system_dim(inputs))
    cfg = config.run_config()
    kwargs = {"prepare": config.experiment["prepare"]} if config.algorithm in (3, 4) else {}
    report = run_algorithm(config.algorithm, rho, inputs, cfg, **kwargs)
    data = report.to_dict()

    if args.eps is not None:
        if config.algorithm == 2:
            estimate = copies_needed_trotter(inputs, cfg.t, args.eps, cfg.ordering)
            data["copies_needed"] = estimate.to_dict()
        elif isinstance(inputs, LinearSpec | PolySpec):
            data["copies_needed"] = copies_needed(inputs.c, cfg.t, args.eps).to_dict()
            data["queries_needed"] = queries_needed(inputs.lam, inputs.c, cfg.t, args.eps)
        else:
            data["copies_needed"] = copies_needed(inputs.c, cfg.t, args.eps, inputs).to_dict()

    if args.consistency:
        if config.algorithm != 1:
            raise ConfigError("--consistency needs experiment.algorithm = 1")
        data["monte_carlo_consistency"] = monte_carlo_consistency(
            rho, inputs, cfg, seed=config.experiment["seed"] or 0
        ).to_dict()
        data["branch_frequencies"] = branch_frequency_check(
            inputs, seed=config.experiment["seed"] or 0
        ).to_dict()

    report_id = cache.save(data, "simulate")
    out = _out_path(args, config)
    if out is not None:
        file_data = {k: v for k, v in data.items() if args.timing or k != "wall_time"}
        write_output(out, OutputFormatter.format_json(file_data))

    summary = OutputFormatter.simulate_summary(data)
    _emit(
        args,
        data,
        OutputFormatter.format_minimal("Simulate", "OK", summary, report_id),
        OutputFormatter.format_minimal("Simulate", "OK", summary, report_id)
        + "\n"
        + OutputFormatter.format_json({k: v for k, v in data.items() if k != "final"}).rstrip("\n"),
    )
    return EXIT_SUCCESS


def cmd_sweep(args: argparse.Namespace, cache: ReportCache) -> int:
    config = _load_config(args)
    runner = SweepRunner(config)
    result = runner.run()
    if config.algorithm == 2 and len(result.slopes) > 1:
        result.metadata["palindromic_over_forward"] = trotter_error_ratio(result)
    if args.doubling is not None:
        result.metadata["doubling_ratio"] = doubling_ratio(config, args.doubling)

    data = result.to_dict()
    report_id = cache.save(data, "sweep")
    out = _out_path(args, config)
    if out is not None:
        # ratios are printed and cached; the CSV keeps scalar metadata only
        scalar = {k: v for k, v in result.metadata.items() if not isinstance(v, dict)}
        csv_result = dataclasses.replace(result, metadata=scalar)
        write_output(out, sweep_csv(csv_result, timing=args.timing))

    _emit(
        args,
        data,
        OutputFormatter.format_minimal(
            "Sweep", "OK", OutputFormatter.sweep_summary(result), report_id
        ),
        OutputFormatter.format_sweep_verbose(result),
    )
    return EXIT_SUCCESS


def cmd_verify_lemmas(args: argparse.Namespace, cache: ReportCache) -> int:
    seed = args.seed if args.seed is not None else 0
    report = verify_lemmas(seed=seed, trials=args.trials, corrupt_m=args.corrupt_m)
    data = report.to_dict()

    rows = perturbation_bound_check(np.random.default_rng(seed))
    data["perturbation_bound"] = [
        {
            "delta": r.delta,
            "t": r.t,
            "max_distance": r.max_distance,
            "bound": r.bound,
            "passed": r.passed,
        }
        for r in rows
    ]
    passed = report.passed and all(r.passed for r in rows)
    data["passed"] = passed

    report_id = cache.save(data, "verify-lemmas")
    out = _out_path(args, None)
    if out is not None:
        write_output(out, OutputFormatter.format_json(data))

    suites_ok = sum(1 for s in report.suites if s.passed)
    summary = f"{suites_ok}/{len(report.suites)} suites passed"
    if not all(r.passed for r in rows):
        summary += ", perturbation bound violated"
    _emit(
        args,
        data,
        OutputFormatter.format_minimal("Lemmas", "PASS" if passed else "FAIL", summary, report_id),
        OutputFormatter.format_lemmas_verbose(data),
    )
    return EXIT_SUCCESS if passed else EXIT_LEMMA_FAILURE


def cmd_compare_tomography(args: argparse.Namespace, cache: ReportCache) -> int:
    table = compare_tomography(args.d_values, args.eps, args.t)
    data = table.to_dict()
    report_id = cache.save(data, "compare-tomography")
    out = _out_path(args, None)
    if out is not None:
        write_output(out, comparison_csv(table))

    last = table.rows[-1]
    summary = (
        f"{len(table.rows)} dimensions, wml {last.wml} copies, "
        f"ratio {last.ratio:.2f} at d={last.d}"
    )
    _emit(
        args,
        data,
        OutputFormatter.format_minimal("Compare", "OK", summary, report_id),
        OutputFormatter.format_comparison_verbose(table),
    )
    return EXIT_SUCCESS


def cmd_prep_state(args: argparse.Namespace, cache: ReportCache) -> int:
    config = _load_config(args)
    inputs = config.build_spec()
    if isinstance(inputs, LinearSpec):
        report = lcu_prepare_from_spec(inputs)
    elif isinstance(inputs, PolySpec):
        report = lcu_prepare_poly(inputs)
    else:
        raise ConfigError(
            "prep-state needs a 'linear' or 'poly' spec "
            "(set spec.kind and experiment.algorithm 3 or 4)"
        )
    data = report.to_dict()
    report_id = cache.save(data, "prep-state")
    out = _out_path(args, config)
    if out is not None:
        write_output(out, OutputFormatter.format_json(data))

    summary = (
        f"p={report.success_prob:.6f}, {report.aa_rounds} AA rounds, "
        f"fidelity {report.fidelity:.12f}, {report.total_queries} queries"
    )
    _emit(
        args,
        data,
        OutputFormatter.format_minimal("Prep", "OK", summary, report_id),
        OutputFormatter.format_prep_verbose(data),
    )
    return EXIT_SUCCESS


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify-lemmas": cmd_verify_lemmas,
    "compare-tomography": cmd_compare_tomography,
    "prep-state": cmd_prep_state,
}


def _list_reports(args: argparse.Namespace, cache: ReportCache) -> int:
    entries = cache.list_entries()
    if args.json:
        sys.stdout.write(OutputFormatter.format_json({"reports": entries}))
    elif not entries:
        print("No cached reports found")
    else:
        print(f"Recent reports ({len(entries)}):")
        print()
        for entry in entries:
            print(f"  {entry['id']}")
            print(f"    Created: {entry['created_at']}")
            print()
    return EXIT_SUCCESS


def _get_report(args: argparse.Namespace, cache: ReportCache) -> int:
    data = cache.get(args.get_report)
    if data is None:
        print(f"Error: Report not found: {args.get_report}", file=sys.stderr)
        print("Use --list-reports to see available reports", file=sys.stderr)
        return EXIT_FAILURE
    sys.stdout.write(OutputFormatter.format_json(data))
    return EXIT_SUCCESS


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        if args.tol is not None:
            tensor_utils.configure(default_tol=args.tol, invariant_tol=args.tol)
        cache = ReportCache(args.cache_dir)

        if args.list_reports:
            return _list_reports(args, cache)
        if args.get_report:
            return _get_report(args, cache)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_CONFIG

        return HANDLERS[args.command](args, cache)
    except WMLError as e:
        print(f"Error: {e}", file=sys.stderr)
        for hint in OutputFormatter.generate_hints(e):
            print(hint, file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
