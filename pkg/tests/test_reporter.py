import json

import pytest

from wml.common.errors import ModeError, StepSizeError
from wml.engine.reporter import (
    COMPARISON_HEADER,
    SWEEP_HEADER,
    OutputFormatter,
    comparison_csv,
    format_float,
    sweep_csv,
    write_output,
)
from wml.engine.sweep import SweepResult, SweepRow
from wml.engine.tomography import compare_tomography


@pytest.fixture
def result():
    rows = [
        SweepRow(8, "forward", 0.125, wall_ms=1.5, consumed={"psi_1": 8, "sigma_1": 8}),
        SweepRow(16, "forward", 0.0625, wall_ms=2.0, consumed={"psi_1": 16, "sigma_1": 16}),
    ]
    return SweepResult(
        algorithm=2,
        t=1.0,
        mode="expectation",
        rows=rows,
        slopes={"forward": -1.0},
        metadata={"seed": 0, "tol": None},
    )


def test_format_float():
    assert format_float(0.5) == "5.000000000000e-01"
    assert format_float(None) == ""


def test_sweep_csv(result):
    lines = sweep_csv(result).splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert lines[1] == "2,forward,8,1.250000000000e-01,16,psi_1:8;sigma_1:8"
    assert lines[3:] == [
        "# mode=expectation",
        "# seed=0",
        "# slope_forward=-1.000000000000e+00",
        "# t=1.000000000000e+00",
        "# tol=",
    ]


def test_sweep_csv_timing_column(result):
    lines = sweep_csv(result, timing=True).splitlines()
    assert lines[0].endswith(",wall_ms")
    assert lines[1].endswith(",1.500")


def test_comparison_csv():
    text = comparison_csv(compare_tomography([2, 4], eps=0.1))
    lines = text.splitlines()
    assert lines[0] == ",".join(COMPARISON_HEADER)
    assert lines[1].startswith("2,1.000000000000e-01,8.78")
    assert "# log=natural" in lines
    assert text.endswith("\n")


def test_format_minimal():
    line = OutputFormatter.format_minimal("Sweep", "OK", "alg 1, 8 points", "sweep-20261019-114501")
    assert line == "Sweep: OK (alg 1, 8 points) [sweep-20261019-114501]"
    assert OutputFormatter.format_minimal("Lemmas", "FAIL", "7/8") == "Lemmas: FAIL (7/8)"


def test_format_json_sorted():
    text = OutputFormatter.format_json({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert list(json.loads(text)) == ["a", "b"]


def test_sweep_summary(result):
    assert OutputFormatter.sweep_summary(result) == "alg 2, 2 points, slope forward -1.000"
    result.slopes["forward"] = None
    assert "forward n/a" in OutputFormatter.sweep_summary(result)


def test_verbose_sweep(result):
    text = OutputFormatter.format_sweep_verbose(result)
    assert "Slope (forward): -1.0000" in text
    assert text.splitlines()[4].split()[:2] == ["forward", "8"]


@pytest.mark.parametrize(
    ("error", "needle"),
    [
        (StepSizeError("series did not converge"), "Increase n"),
        (ModeError("expectation only"), "--mode expectation"),
        (ValueError("config file not found: x.json"), "Omit --config"),
        (ValueError("state is not a density matrix"), "trace one"),
    ],
)
def test_hints(error, needle):
    assert any(needle in hint for hint in OutputFormatter.generate_hints(error))


def test_no_hints_for_unrelated_error():
    assert OutputFormatter.generate_hints(RuntimeError("boom")) == []


def test_write_output_atomic(tmp_path):
    path = tmp_path / "out" / "sweep.csv"
    write_output(path, "a,b\n")
    assert path.read_bytes() == b"a,b\n"
    assert not path.with_suffix(".csv.tmp").exists()
