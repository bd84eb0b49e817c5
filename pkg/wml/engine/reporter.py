"""
Result formatting for wml-bench.

Provides the minimal / verbose / JSON tiers for terminal output and the
CSV writers for sweep and comparison files.
"""

import csv
import io
import json
from pathlib import Path
from typing import Any

from .sweep import SweepResult
from .tomography import ComparisonTable

SWEEP_HEADER = ["algorithm", "ordering", "n", "choi_proxy_error", "total_consumed", "consumed"]
COMPARISON_HEADER = ["d", "delta", "tomography", "wml", "ratio"]


def format_float(value: float | None) -> str:
    """Locale-independent fixed-width float text ('' for None)."""
    if value is None:
        return ""
    return f"{value:.12e}"


def _format_counts(counts: dict[str, int]) -> str:
    return ";".join(f"{label}:{count}" for label, count in sorted(counts.items()))


def _metadata_lines(metadata: dict[str, Any]) -> list[str]:
    lines = []
    for key in sorted(metadata):
        value = metadata[key]
        if isinstance(value, float):
            value = format_float(value)
        elif value is None:
            value = ""
        lines.append(f"# {key}={value}")
    return lines


class OutputFormatter:
    """
    Format command results for display.

    Supports ultra-minimal default output, verbose mode, and JSON output.
    """

    @staticmethod
    def format_minimal(
        command: str, status: str, summary: str, report_id: str | None = None
    ) -> str:
        """
        Format a one-line result.

        Example:
            Sweep: OK (alg 1, 8 points, slope -1.002) [sweep-20261019-114501]
            Lemmas: FAIL (7/8 suites passed) [verify-lemmas-20261019-114501]
        """
        line = f"{command}: {status} ({summary})"
        if report_id:
            line += f" [{report_id}]"
        return line

    @staticmethod
    def format_json(data: dict[str, Any]) -> str:
        """Pretty-printed JSON with sorted keys and a trailing newline."""
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def simulate_summary(report: dict[str, Any]) -> str:
        error = report.get("error_vs_oracle")
        error_text = "n/a" if error is None else f"{error:.3e}"
        return (
            f"alg {report['algorithm']}, n={report['n']}, {report['mode']}, "
            f"error {error_text}, {report['total_consumed']} copies"
        )

    @staticmethod
    def sweep_summary(result: SweepResult) -> str:
        slopes = ", ".join(
            f"{key} {value:+.3f}" if value is not None else f"{key} n/a"
            for key, value in sorted(result.slopes.items())
        )
        return f"alg {result.algorithm}, {len(result.rows)} points, slope {slopes}"

    @staticmethod
    def format_sweep_verbose(result: SweepResult) -> str:
        lines = [f"Sweep: algorithm {result.algorithm}, t={result.t}, mode={result.mode}"]
        lines.append(f"  Error: {result.metadata.get('error_kind', 'choi_trace_distance')}")
        lines.append("")
        lines.append(f"  {'ordering':<12} {'n':>6} {'error':>12} {'copies':>8} {'ms':>9}")
        for row in result.rows:
            lines.append(
                f"  {row.ordering or '-':<12} {row.n:>6} {row.choi_proxy_error:>12.4e} "
                f"{row.total_consumed:>8} {row.wall_ms:>9.1f}"
            )
        lines.append("")
        for key, value in sorted(result.slopes.items()):
            lines.append(f"Slope ({key}): {'n/a' if value is None else f'{value:.4f}'}")
        return "\n".join(lines)

    @staticmethod
    def format_lemmas_verbose(report: dict[str, Any]) -> str:
        lines = [f"Lemmas: {'PASS' if report['passed'] else 'FAIL'} (seed {report['seed']})", ""]
        for suite in report["suites"]:
            mark = "ok" if suite["passed"] else "FAIL"
            lines.append(
                f"  [{mark:>4}] {suite['name']:<28} max residual {suite['max_residual']:.3e} "
                f"(tol {suite['tol']:.0e}, {suite['failures']}/{suite['trials']} failed)"
            )
        return "\n".join(lines)

    @staticmethod
    def format_comparison_verbose(table: ComparisonTable) -> str:
        lines = [f"Tomography vs WML (eps={table.eps}, t={table.t}, log natural, constants 1)", ""]
        lines.append(f"  {'d':>4} {'tomography':>14} {'wml':>8} {'ratio':>12}")
        for row in table.rows:
            lines.append(f"  {row.d:>4} {row.tomography:>14.4f} {row.wml:>8} {row.ratio:>12.4f}")
        return "\n".join(lines)

    @staticmethod
    def format_prep_verbose(report: dict[str, Any]) -> str:
        lines = ["Prep-state:"]
        lines.append(f"  Success probability: {report['success_prob']:.12f}")
        lines.append(f"  Expected c/lambda^2: {report['expected_success_prob']:.12f}")
        lines.append(f"  AA rounds: {report['aa_rounds']}")
        lines.append(f"  Amplified success: {report['amplified_success_prob']:.12f}")
        if report.get("fidelity") is not None:
            lines.append(f"  Fidelity vs direct: {report['fidelity']:.12f}")
        lines.append("  Queries: " + ", ".join(f"{k}={v}" for k, v in report["queries"].items()))
        lines.append(f"  Total queries: {report['total_queries']}")
        return "\n".join(lines)

    @staticmethod
    def generate_hints(error: Exception) -> list[str]:
        """
        Generate actionable hints for a failed command.

        Args:
            error: The exception that ended the command

        Returns:
            List of hint strings
        """
        message = str(error).lower()
        hints = []
        name = type(error).__name__
        if name == "StepSizeError":
            hints.append("Action-mode series did not converge:")
            hints.append("  • Increase n so each step is shorter")
            hints.append("  • Or set experiment.substeps explicitly in the config")
        if name == "SizeError":
            hints.append("Dense operator would exceed the entry limit:")
            hints.append("  • Use experiment.channel_mode = 'action'")
        if name == "ModeError" or "monte_carlo" in message:
            hints.append("Monte-Carlo mode is only available for algorithm 1:")
            hints.append("  • Use --mode expectation for algorithms 2-4")
        if "config file not found" in message:
            hints.append(
                "Omit --config to run with the defaults, "
                "or see references/cli_quick.md for a sample file"
            )
        if "density" in message:
            hints.append("rho must be Hermitian, positive semidefinite and trace one")
        return hints


def sweep_csv(result: SweepResult, timing: bool = False) -> str:
    """
    Sweep rows as CSV text followed by '# key=value' metadata lines.

    wall_ms is only emitted when timing is set so the default file is
    reproducible byte for byte.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER + (["wall_ms"] if timing else []))
    for row in result.rows:
        values = [
            result.algorithm,
            row.ordering,
            row.n,
            format_float(row.choi_proxy_error),
            row.total_consumed,
            _format_counts(row.consumed),
        ]
        if timing:
            values.append(f"{row.wall_ms:.3f}")
        writer.writerow(values)
    metadata = {f"slope_{key}": value for key, value in result.slopes.items()}
    metadata.update({"t": result.t, "mode": result.mode, **result.metadata})
    return buf.getvalue() + "\n".join(_metadata_lines(metadata)) + "\n"


def comparison_csv(table: ComparisonTable) -> str:
    """Comparison rows as CSV text followed by the conventions block."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARISON_HEADER)
    for row in table.rows:
        writer.writerow(
            [
                row.d,
                format_float(row.delta),
                format_float(row.tomography),
                row.wml,
                format_float(row.ratio),
            ]
        )
    return buf.getvalue() + "\n".join(_metadata_lines(table.metadata)) + "\n"


def write_output(path: Path, text: str) -> None:
    """Write UTF-8 text atomically (temp file + rename)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_suffix(path.suffix + ".tmp")
    with open(temp_path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    temp_path.replace(path)
