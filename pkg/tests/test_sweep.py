import json

import numpy as np
import pytest

from wml.common.channel_utils import DensityMatrix
from wml.common.errors import ArgumentError, ConfigError
from wml.engine.config import ExperimentConfig, spec_from_json
from wml.engine.specs import RunConfig
from wml.engine.sweep import (
    SweepRunner,
    branch_frequency_check,
    doubling_ratio,
    fit_slope,
    monte_carlo_consistency,
    trotter_error_ratio,
)


TWO_JUMP = {"kind": "lindblad", "preset": "two_jump"}


def make_config(tmp_path, spec=None, **experiment):
    data = {"experiment": experiment}
    if spec is not None:
        data["spec"] = spec
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return ExperimentConfig.load(path)


class TestFitSlope:
    def test_inverse_law(self):
        xs = [8, 16, 32, 64]
        assert fit_slope(xs, [3.0 / x for x in xs]) == pytest.approx(-1.0)

    def test_quadratic_law(self):
        xs = [2, 4, 8]
        assert fit_slope(xs, [5.0 / x**2 for x in xs]) == pytest.approx(-2.0)

    def test_nonpositive_gives_none(self):
        assert fit_slope([1, 2, 4], [0.1, 0.0, 0.2]) is None
        assert fit_slope([1], [0.5]) is None

    def test_length_mismatch(self):
        with pytest.raises(ArgumentError):
            fit_slope([1, 2], [1.0])


class TestSweepRunner:
    def test_needs_four_points(self, tmp_path):
        config = make_config(tmp_path, n_values=[8, 16, 32])
        with pytest.raises(ConfigError, match="at least 4"):
            SweepRunner(config).run()

    def test_algorithm_one_first_order(self, tmp_path):
        config = make_config(tmp_path, n_values=[16, 32, 64, 128])
        result = SweepRunner(config).run()
        assert [row.n for row in result.rows] == [16, 32, 64, 128]
        assert result.slopes["all"] == pytest.approx(-1.0, abs=0.1)
        assert all(row.total_consumed == row.n for row in result.rows)
        assert result.metadata["error_kind"] == "choi_trace_distance"

    def test_algorithm_two_rows_sorted(self, tmp_path):
        config = make_config(tmp_path, algorithm=2, n_values=[16, 32, 64, 128])
        result = SweepRunner(config).run()
        assert len(result.rows) == 8
        keys = [(r.ordering, r.n) for r in result.rows]
        assert keys == sorted(keys)
        assert set(result.slopes) == {"forward", "palindromic"}
        assert result.slopes["forward"] == pytest.approx(-1.0, abs=0.15)
        assert result.slopes["palindromic"] == pytest.approx(-1.0, abs=0.15)
        ratios = trotter_error_ratio(result)
        assert sorted(ratios) == [16, 32, 64, 128]
        assert all(r < 1 for r in ratios.values())

    def test_threads_do_not_change_results(self, tmp_path):
        config = make_config(tmp_path, algorithm=2, n_values=[4, 8, 16, 32])
        serial = SweepRunner(config, threads=1).run()
        parallel = SweepRunner(config, threads=2).run()
        assert [(r.ordering, r.n, r.choi_proxy_error) for r in serial.rows] == [
            (r.ordering, r.n, r.choi_proxy_error) for r in parallel.rows
        ]

    def test_linear_and_poly(self, tmp_path):
        for alg, kind, preset in ((3, "linear", "linear_pair"), (4, "poly", "poly_12_1")):
            config = make_config(
                tmp_path,
                spec={"kind": kind, "preset": preset},
                algorithm=alg,
                n_values=[16, 32, 64, 128],
            )
            result = SweepRunner(config).run()
            assert result.slopes["all"] == pytest.approx(-1.0, abs=0.15)

    def test_monte_carlo_reproducible(self, tmp_path):
        config = make_config(
            tmp_path, mode="monte_carlo", n_values=[8, 16, 32, 64], trajectories=3, seed=4
        )
        first = SweepRunner(config).run()
        second = SweepRunner(config).run()
        assert [r.choi_proxy_error for r in first.rows] == [r.choi_proxy_error for r in second.rows]
        assert first.metadata["error_kind"] == "state_trace_distance"
        assert first.rows[0].total_consumed == 3 * 8

    def test_monte_carlo_needs_algorithm_one(self, tmp_path):
        config = make_config(tmp_path, algorithm=2, mode="monte_carlo", n_values=[8, 16, 32, 64])
        with pytest.raises(ConfigError, match="algorithm 1"):
            SweepRunner(config).run()


def test_branch_frequency_bookkeeping():
    check = branch_frequency_check(spec_from_json(TWO_JUMP), draws=20_000, seed=1)
    assert check.labels == ["sigma_1", "psi_1", "psi_2"]
    assert sum(check.observed) == 20_000
    assert check.expected[0] == pytest.approx(20_000 * 0.5 / 1.49)
    assert sum(check.expected) == pytest.approx(20_000)
    assert 0.0 <= check.p_value <= 1.0


@pytest.mark.slow
def test_branch_frequencies_within_three_sigma():
    check = branch_frequency_check(spec_from_json(TWO_JUMP), draws=100_000, seed=0)
    assert sum(check.observed) == 100_000
    assert check.max_sigma < 3.0
    assert check.p_value > 1e-3


def test_doubling_restores_time(tmp_path):
    config = make_config(tmp_path, t=0.5)
    doubling_ratio(config, 64)
    assert config.experiment["t"] == 0.5


def test_doubling_needs_positive_time(tmp_path):
    config = make_config(tmp_path, t=0.0)
    with pytest.raises(ConfigError, match="t > 0"):
        doubling_ratio(config, 16)


@pytest.mark.slow
def test_doubling_ratio_near_four(tmp_path):
    config = make_config(tmp_path)
    assert 3.0 < doubling_ratio(config, 256) < 5.0


@pytest.mark.slow
def test_monte_carlo_mean_converges():
    spec = spec_from_json(TWO_JUMP)
    rho = DensityMatrix(np.eye(2, dtype=complex) / 2)
    result = monte_carlo_consistency(rho, spec, RunConfig(t=1.0, n=8), seed=3)
    assert result.distances[-1] < result.distances[0]
    assert -0.7 <= result.slope <= -0.3


@pytest.mark.slow
def test_algorithm_one_full_range(tmp_path):
    n_values = [8, 16, 32, 64, 128, 256, 512, 1024]
    result = SweepRunner(make_config(tmp_path, n_values=n_values)).run()
    assert -1.15 <= result.slopes["all"] <= -0.85
    errors = {row.n: row.choi_proxy_error for row in result.rows}
    assert errors[8] >= 64 * errors[1024]


@pytest.mark.slow
def test_palindromic_never_worse_through_512(tmp_path):
    n_values = [16, 32, 64, 128, 256, 512]
    result = SweepRunner(make_config(tmp_path, algorithm=2, n_values=n_values)).run()
    for ordering in ("forward", "palindromic"):
        assert result.slopes[ordering] == pytest.approx(-1.0, abs=0.15)
    ratios = trotter_error_ratio(result)
    assert sorted(ratios) == n_values
    assert all(r <= 1.0 for r in ratios.values())
